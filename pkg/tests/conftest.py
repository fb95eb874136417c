from __future__ import annotations

from pathlib import Path

import pytest

from mergectx.frontend import DefKind, parse_file
from mergectx.graph import MtCpg, build_mtcpg

FIXTURES = Path(__file__).parent / "fixtures"

T, M, MEM, G, I, S, V = (
    DefKind.TYPE_DEF,
    DefKind.METHOD_DEF,
    DefKind.MEMBER_DEF,
    DefKind.GLOBAL_VAR_DEF,
    DefKind.IMPORT_DEF,
    DefKind.METHOD_STMT,
    DefKind.METHOD_VAR_DEF,
)
H, C, MAIN = "math_utils.h", "math_utils.c", "main.c"

# reference node number -> (file, kind, name, first line)
POINT_AREA_NODES = {
    1: (H, T, "Point", 1),
    2: (H, MEM, "x", 2),
    3: (H, MEM, "y", 3),
    4: (H, M, "area", 5),
    5: (H, V, "x", 5),
    6: (H, V, "y", 5),
    7: (C, I, "math_utils.h", 1),
    8: (C, G, "PI", 2),
    9: (C, M, "area", 3),
    10: (C, V, "x", 3),
    11: (C, V, "y", 3),
    12: (C, S, "", 4),
    13: (MAIN, I, "math_utils.h", 1),
    14: (MAIN, M, "main", 2),
    15: (MAIN, V, "p", 3),
    16: (MAIN, V, "a", 4),
    17: (MAIN, S, "", 4),
}


def point_area_ids(graph: MtCpg) -> dict[int, int]:
    return {num: graph.find(file, kind, name, line).id for num, (file, kind, name, line) in POINT_AREA_NODES.items()}


# acceptance lines collected by test_acceptance.py, printed after the run
ACCEPTANCE: dict[str, str] = {}


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def load_point_area(version: str = "A") -> MtCpg:
    root = FIXTURES / "point_area"
    defs = {p.name: parse_file(p, name=p.name) for p in sorted(root.iterdir())}
    return build_mtcpg(defs, version=version)


@pytest.fixture()
def point_area() -> MtCpg:
    return load_point_area()


def pytest_terminal_summary(terminalreporter) -> None:
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in ACCEPTANCE.items():
        terminalreporter.write_line(f"{verdict:<4} {name}")
