"""Python frontend on top of the standard ``ast`` module."""

from __future__ import annotations

import ast
import builtins

from .model import DefKind, ParseFailure, RawDefinition, _Builder

_BUILTINS = frozenset(dir(builtins)) | {"self", "cls"}

_COMPOUND = (
    ast.If,
    ast.For,
    ast.AsyncFor,
    ast.While,
    ast.With,
    ast.AsyncWith,
    ast.Try,
)


def _span(node: ast.AST) -> tuple[int, int]:
    return node.lineno, getattr(node, "end_lineno", None) or node.lineno


def _header_span(node: ast.stmt) -> tuple[int, int]:
    """Lines of a compound statement up to (not including) its body."""
    body = getattr(node, "body", None)
    if body:
        return node.lineno, max(node.lineno, body[0].lineno - 1)
    return _span(node)


class _Names(ast.NodeVisitor):
    def __init__(self, imported: set[str]):
        self.reads: list[str] = []
        self.writes: list[str] = []
        self.attrs: list[str] = []
        self.imported = imported

    def visit_Name(self, node: ast.Name) -> None:
        if isinstance(node.ctx, ast.Store) or isinstance(node.ctx, ast.Del):
            self.writes.append(node.id)
        else:
            self.reads.append(node.id)

    def visit_Attribute(self, node: ast.Attribute) -> None:
        base = node.value
        if isinstance(base, ast.Name) and base.id in self.imported:
            self.attrs.append(node.attr)
        if isinstance(base, ast.Name) and base.id == "self" and isinstance(node.ctx, ast.Store):
            self.writes.append(node.attr)
        self.generic_visit(node)

    def visit_AugAssign(self, node: ast.AugAssign) -> None:
        if isinstance(node.target, ast.Name):
            self.reads.append(node.target.id)
        self.generic_visit(node)

    # nested scopes belong to their own definitions
    def visit_Lambda(self, node: ast.Lambda) -> None:
        self.visit(node.body)


def _uniq(seq) -> tuple[str, ...]:
    return tuple(dict.fromkeys(seq))


class _PyParser:
    def __init__(self, file: str, tree: ast.Module):
        self.b = _Builder(file)
        self.tree = tree
        self.imported: set[str] = set()

    def names(self, *nodes: ast.AST | None) -> _Names:
        v = _Names(self.imported)
        for n in nodes:
            if n is not None:
                v.visit(n)
        return v

    def refs(self, v: _Names) -> tuple[str, ...]:
        return _uniq(n for n in (*v.reads, *v.writes, *v.attrs) if n not in _BUILTINS)

    def run(self) -> list[RawDefinition]:
        for node in self.tree.body:
            if isinstance(node, (ast.Import, ast.ImportFrom)):
                for alias in node.names:
                    self.imported.add((alias.asname or alias.name).split(".")[0])
        for node in self.tree.body:
            self.toplevel(node)
        return self.b.defs

    def toplevel(self, node: ast.stmt) -> None:
        b = self.b
        if isinstance(node, ast.Import):
            for alias in node.names:
                b.add(DefKind.IMPORT_DEF, alias.asname or alias.name, _span(node), target=alias.name)
        elif isinstance(node, ast.ImportFrom):
            module = "." * node.level + (node.module or "")
            for alias in node.names:
                # local binding as name, imported spelling kept for lookup
                orig = () if alias.asname is None else (alias.name,)
                b.add(DefKind.IMPORT_DEF, alias.asname or alias.name, _span(node), target=module, alt_names=orig)
        elif isinstance(node, ast.ClassDef):
            self.class_def(node, None)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            self.function(node, None)
        elif isinstance(node, (ast.Assign, ast.AnnAssign, ast.AugAssign)):
            targets = node.targets if isinstance(node, ast.Assign) else [node.target]
            value_refs = self.refs(self.names(node.value, getattr(node, "annotation", None)))
            for t in targets:
                for name in self.target_names(t):
                    b.add(DefKind.GLOBAL_VAR_DEF, name, _span(node), referenced_names=value_refs)
        elif isinstance(node, _COMPOUND):
            # module-level if/try blocks: definitions inside are still top level
            for child in self.child_bodies(node):
                self.toplevel(child)

    @staticmethod
    def child_bodies(node: ast.stmt) -> list[ast.stmt]:
        out: list[ast.stmt] = []
        for field in ("body", "orelse", "finalbody"):
            out.extend(getattr(node, field, []) or [])
        for h in getattr(node, "handlers", []) or []:
            out.extend(h.body)
        return out

    @staticmethod
    def target_names(t: ast.AST) -> list[str]:
        if isinstance(t, ast.Name):
            return [t.id]
        if isinstance(t, (ast.Tuple, ast.List)):
            return [n for e in t.elts for n in _PyParser.target_names(e)]
        if isinstance(t, ast.Starred):
            return _PyParser.target_names(t.value)
        return []

    def class_def(self, node: ast.ClassDef, owner: int | None) -> None:
        header = self.refs(self.names(*node.bases, *node.keywords, *node.decorator_list))
        start = min([node.lineno] + [d.lineno for d in node.decorator_list])
        t = self.b.add(DefKind.TYPE_DEF, node.name, (start, _span(node)[1]), parent=owner, referenced_names=header)
        for child in node.body:
            if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef)):
                self.function(child, t)
            elif isinstance(child, ast.ClassDef):
                self.class_def(child, t)
            elif isinstance(child, (ast.Assign, ast.AnnAssign)):
                targets = child.targets if isinstance(child, ast.Assign) else [child.target]
                refs = self.refs(self.names(child.value, getattr(child, "annotation", None)))
                for tg in targets:
                    for name in self.target_names(tg):
                        self.b.add(DefKind.MEMBER_DEF, name, _span(child), parent=t, referenced_names=refs)

    def function(self, node: ast.FunctionDef | ast.AsyncFunctionDef, owner: int | None) -> None:
        b = self.b
        start = min([node.lineno] + [d.lineno for d in node.decorator_list])
        header = self.names(node.returns, *node.decorator_list)
        args = node.args
        all_args = [*args.posonlyargs, *args.args, *args.kwonlyargs]
        if args.vararg:
            all_args.append(args.vararg)
        if args.kwarg:
            all_args.append(args.kwarg)
        sig = tuple(
            ast.unparse(a.annotation) if a.annotation else "" for a in all_args if a.arg not in ("self", "cls")
        )
        m = b.add(
            DefKind.METHOD_DEF,
            node.name,
            (start, _span(node)[1]),
            parent=owner,
            signature=sig,
            referenced_names=self.refs(header),
        )
        local: set[str] = set()
        for a in all_args:
            if a.arg in ("self", "cls"):
                continue
            refs = self.refs(self.names(a.annotation)) if a.annotation else ()
            b.add(DefKind.METHOD_VAR_DEF, a.arg, _span(a), parent=m, referenced_names=refs)
            local.add(a.arg)
        defaults = [d for d in (*args.defaults, *args.kw_defaults) if d is not None]
        v = self.names(*defaults)
        if self.refs(v):
            b.add(
                DefKind.METHOD_STMT,
                "",
                (defaults[0].lineno, defaults[-1].end_lineno or defaults[-1].lineno),
                parent=m,
                referenced_names=self.refs(v),
                reads=_uniq(v.reads),
            )
        self.body(node.body, m, local)

    def body(self, stmts: list[ast.stmt], m: int, local: set[str]) -> None:
        for s in stmts:
            self.statement(s, m, local)

    def statement(self, s: ast.stmt, m: int, local: set[str]) -> None:
        b = self.b
        if isinstance(s, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            # nested definition: the binding is a local, the body is opaque
            self.declare(s.name, _span(s), m, local, ())
            return
        if isinstance(s, _COMPOUND) or hasattr(ast, "Match") and isinstance(s, getattr(ast, "Match")):
            head = self.header_nodes(s)
            v = self.names(*head)
            for name in v.writes:
                self.declare(name, _header_span(s), m, local, ())
            b.add(
                DefKind.METHOD_STMT,
                "",
                _header_span(s),
                parent=m,
                referenced_names=self.refs(v),
                reads=_uniq(v.reads),
                writes=_uniq(v.writes),
            )
            if isinstance(s, ast.Try):
                for h in s.handlers:
                    if h.name:
                        self.declare(h.name, _span(h)[:1] * 2, m, local, self.refs(self.names(h.type)))
            if hasattr(ast, "Match") and isinstance(s, getattr(ast, "Match")):
                for case in s.cases:
                    self.body(case.body, m, local)
            for child in self.child_bodies(s):
                self.statement(child, m, local)
            return
        v = self.names(s)
        for name in v.writes:
            if isinstance(s, (ast.Global, ast.Nonlocal)):
                break
            self.declare(name, _span(s), m, local, ())
        if isinstance(s, (ast.Import, ast.ImportFrom)):
            for alias in s.names:
                self.declare((alias.asname or alias.name).split(".")[0], _span(s), m, local, ())
        b.add(
            DefKind.METHOD_STMT,
            "",
            _span(s),
            parent=m,
            referenced_names=self.refs(v),
            reads=_uniq(v.reads),
            writes=_uniq(v.writes),
        )

    @staticmethod
    def header_nodes(s: ast.stmt) -> list[ast.AST]:
        if isinstance(s, (ast.If, ast.While)):
            return [s.test]
        if isinstance(s, (ast.For, ast.AsyncFor)):
            return [s.target, s.iter]
        if isinstance(s, (ast.With, ast.AsyncWith)):
            return list(s.items)
        if hasattr(ast, "Match") and isinstance(s, getattr(ast, "Match")):
            return [s.subject]
        return []

    def declare(self, name: str, span: tuple[int, int], m: int, local: set[str], refs) -> None:
        if name in local:
            return
        local.add(name)
        self.b.add(DefKind.METHOD_VAR_DEF, name, span, parent=m, referenced_names=tuple(refs))


def parse_python(text: str, file: str) -> list[RawDefinition]:
    try:
        tree = ast.parse(text, filename=file)
    except SyntaxError as exc:
        raise ParseFailure(file, exc.lineno or 0, exc.msg) from None
    except ValueError as exc:  # null bytes
        raise ParseFailure(file, 0, str(exc)) from None
    return _PyParser(file, tree).run()
