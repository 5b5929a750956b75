import functools
import sys
from pathlib import Path

import pytest

from lyapcert import numeric
from lyapcert.certify import lift_system
from lyapcert.derivatives import prepare
from lyapcert.systemfile import SystemFile

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
sys.path.insert(0, str(Path(__file__).resolve().parent))

# published reference digits for the two worked examples
EXAMPLE1_DIGITS = "0.88527254423682830137976161938296346097648562498553260801561298288"
EXAMPLE1_HALF_DIGITS = "0.4426362721184141506898808096914817304882428124927663040078064914"
EXAMPLE2_DIGITS = [
    "1.02668753502574322381306743078885698085584733242608611503819069056",
    "0.33334463276727235751442614547568014132159285983670947707698164046",
    "-0.0639419036457356072034216310930854348429261266864059723287519982",
    "0.02371366414237382344579888220429926092282058042663105456465261186",
    "-0.0128210355730842625187071826547727740167197573983063450581179771",
    "0.00758376125675217409196978464888737758815497314787095627447351185",
    "-0.0044084215651143939474934420144888917028299007460083793701014980",
    "0.00247785191099582781991277973432519071852103088719365535035708164",
    "-0.0013568710710027835740828389326212150195134363688067371840763738",
    "0.00073213986765680152283128293804416409308284665797792103205611317",
    "-0.0003933322663856287259434519883711520360640978875502183841794051",
]


def fixture_path(name: str) -> Path:
    return FIXTURES / name


@functools.lru_cache(maxsize=None)
def system_file(name: str) -> SystemFile:
    return SystemFile.load(FIXTURES / name)


@functools.lru_cache(maxsize=None)
def lifted(name: str, bits: int = 128):
    """The lift of a fixture at t0, built at ``bits`` of precision."""
    with numeric.working_precision(bits):
        A, P, M = system_file(name).instantiate()
        return lift_system(A, P, M, None, system_file(name).base_period)


@functools.lru_cache(maxsize=None)
def family(name: str, bits: int = 128):
    with numeric.working_precision(bits):
        return prepare(system_file(name))


@pytest.fixture
def prec128():
    with numeric.working_precision(128, "float") as ctx:
        yield ctx


@pytest.fixture
def prec256():
    with numeric.working_precision(256, "float") as ctx:
        yield ctx


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical checks")
