#ifndef IDMAP_H
#define IDMAP_H

int idmap_version(void);

#endif
