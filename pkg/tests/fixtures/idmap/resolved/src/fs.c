#include "idmap.h"

struct inode {
	int uid;
	int mode;
};

struct iattr {
	int ia_uid;
	int ia_mode;
};

static int map_owner(struct id_map *idmap, struct inode *inode, int uid)
{
	if (uid < 0)
		return -1;
	inode->uid = uid;
	return 0;
}

static int helper_0(int v)
{
	int r = v * 2;
	if (r > 100)
		r -= v;
	return r;
}

static int helper_1(int v)
{
	int r = v * 3;
	if (r > 101)
		r -= v;
	return r;
}

static int helper_2(int v)
{
	int r = v * 4;
	if (r > 102)
		r -= v;
	return r;
}

static int helper_3(int v)
{
	int r = v * 5;
	if (r > 103)
		r -= v;
	return r;
}

static int helper_4(int v)
{
	int r = v * 6;
	if (r > 104)
		r -= v;
	return r;
}

static int helper_5(int v)
{
	int r = v * 7;
	if (r > 105)
		r -= v;
	return r;
}

static int helper_6(int v)
{
	int r = v * 8;
	if (r > 106)
		r -= v;
	return r;
}

static int helper_7(int v)
{
	int r = v * 9;
	if (r > 107)
		r -= v;
	return r;
}

static int helper_8(int v)
{
	int r = v * 10;
	if (r > 108)
		r -= v;
	return r;
}

static int helper_9(int v)
{
	int r = v * 11;
	if (r > 109)
		r -= v;
	return r;
}

static int helper_10(int v)
{
	int r = v * 12;
	if (r > 110)
		r -= v;
	return r;
}

static int helper_11(int v)
{
	int r = v * 13;
	if (r > 111)
		r -= v;
	return r;
}

int notify_change(struct inode *inode, struct iattr *attr)
{
	int err;

	inode->mode = attr->ia_mode;
	err = map_owner(inode_idmap(inode), inode, attr->ia_uid + inode->uid);
	return err;
}
