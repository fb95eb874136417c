#ifndef STACK_H
#define STACK_H

struct stack {
	int *data;
	int len;
	int cap;
};

int stack_push(struct stack *s, int value);
int stack_pop(struct stack *s, int *out);
int stack_grow(struct stack *s);

#endif
