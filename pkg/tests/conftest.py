from __future__ import annotations

import pytest

from lumharch import LightStructure, LightStructureSet, builtin_topology, make_session, parse_network

FIG4A_TEXT = """
NODE s MI
NODE 1 MC
NODE 2 MI
NODE 3 MI
NODE 4 MI
NODE d1 MI
NODE d2 MI
EDGE s 1 1
EDGE 1 2 1
EDGE 1 3 1
EDGE 2 4 1
EDGE 3 4 1
EDGE 4 d1 1
EDGE 4 d2 1
WAVELENGTHS 2
"""

FIG4B_TEXT = """
NODE s MI
NODE 2 MI
NODE d1 MI
NODE d2 MI
EDGE s 2 1
EDGE 2 d1 1
EDGE 2 d2 1
WAVELENGTHS 2
"""


@pytest.fixture(scope="session")
def fig3():
    return builtin_topology("fig3")


@pytest.fixture(scope="session")
def fig3_session(fig3):
    return make_session(fig3, "s", ["d1", "d2"])


@pytest.fixture(scope="session")
def fig5():
    return builtin_topology("fig5")


@pytest.fixture(scope="session")
def fig5_session(fig5):
    return make_session(fig5, "s", ["d1", "d2", "d3"])


@pytest.fixture(scope="session")
def fig4a():
    return parse_network(FIG4A_TEXT)


@pytest.fixture(scope="session")
def fig4b():
    return parse_network(FIG4B_TEXT)


# The hierarchy exhibited for the fig3 topology: s-1-2-3-5-d1-4-3-d2,
# entering MI node 3 twice (cost 8).
FIG3_LH_EXHIBIT_LINKS = (
    ("s", "1"),
    ("1", "2"),
    ("2", "3"),
    ("3", "5"),
    ("5", "d1"),
    ("d1", "4"),
    ("4", "3"),
    ("3", "d2"),
)


@pytest.fixture(scope="session")
def fig3_lh_exhibit(fig3, fig3_session):
    ls = LightStructure(wavelength=0, root="s", links=FIG3_LH_EXHIBIT_LINKS)
    return LightStructureSet(session=fig3_session, structures=(ls,))


@pytest.fixture(scope="session")
def fig3_lt_pair(fig3, fig3_session):
    lt1 = LightStructure(
        wavelength=0,
        root="s",
        links=(("s", "1"), ("1", "2"), ("2", "3"), ("3", "5"), ("5", "d1")),
    )
    lt2 = LightStructure(
        wavelength=1,
        root="s",
        links=(("s", "1"), ("1", "2"), ("2", "3"), ("3", "d2")),
    )
    return LightStructureSet(session=fig3_session, structures=(lt1, lt2))
