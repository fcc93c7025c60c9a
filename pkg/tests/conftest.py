from __future__ import annotations

from pathlib import Path

import pytest

from veltman.formula import Formula, parse
from veltman.frames import Frame, parse_frame

FIXTURES = Path(__file__).parent / "fixtures"
DISPLAYS = FIXTURES / "displays"
FRAMES = FIXTURES / "frames"

# criterion number -> (passed, description); filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def load_display(name: str) -> Formula:
    lines = (DISPLAYS / f"{name}.txt").read_text().splitlines()
    return parse(" ".join(l for l in lines if not l.lstrip().startswith("#")))


def load_fixed_displays() -> dict[str, Formula]:
    out = {}
    for line in (DISPLAYS / "fixed.txt").read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        name, _, text = line.partition(":")
        out[name.strip()] = parse(text)
    return out


def load_frame(name: str) -> Frame:
    return parse_frame((FRAMES / f"{name}.txt").read_text())


@pytest.fixture
def slim_picture() -> Frame:
    """Five worlds w x0 y0 x1 y1 with y0 S_w x1 and no y0 S_x0 y1."""
    return load_frame("slim_f0_picture")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, desc = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {desc}")
