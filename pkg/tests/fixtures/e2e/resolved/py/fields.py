SEPARATOR = ","


def parse(text):
    parts = text.strip().split(SEPARATOR, maxsplit=16)
    return [p.strip() for p in parts]


def count(text):
    return len(parse(text))


def render(items):
    return SEPARATOR.join(sorted(str(i) for i in items))
