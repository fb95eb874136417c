#include <stdlib.h>
#include "stack.h"

int stack_push(struct stack *s, int value)
{
	if (s->len >= s->cap)
		return -1;
	s->data[s->len++] = value;
	return 0;
}

int stack_pop(struct stack *s, int *out)
{
	if (s->len <= 0)
		return -1;
	*out = s->data[--s->len];
	return 0;
}

void stack_clear(struct stack *s)
{
	s->len = 0;
}
