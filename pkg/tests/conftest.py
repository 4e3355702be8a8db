import math

import pytest

import swingcert as sc

OMEGA_G = 100.0 * math.pi
LINE_V = 6000.0 * math.sqrt(3.0)


@pytest.fixture(scope="session")
def spec_500kw():
    return sc.NominalSpec(
        P_n=500e3, V=LINE_V, omega_g=OMEGA_G,
        d_p=3.0, H_seconds=2.0, L_drop_pct=4.0, R_drop_pct=0.5,
    )


@pytest.fixture(scope="session")
def params_n1(spec_500kw):
    return sc.size_parameters(spec_500kw)


@pytest.fixture(scope="session")
def params_n30(params_n1):
    return sc.apply_virtual_inductor(params_n1, 30.0)


@pytest.fixture(scope="session")
def dc_n30(params_n30):
    return sc.derive_constants(params_n30)


@pytest.fixture(scope="session")
def params_rs216(params_n1):
    # Resistor drop doubled to 1% of phase rms: loses almost-global stability.
    return params_n1.replace(R_s=2.16)


@pytest.fixture(scope="session")
def params_dp15(params_n1):
    # Weak droop variant; T_m keeps the nominal torque relation
    # T_m = T_a + D_p*omega_g with T_a = P_n/omega_g fixed.
    T_a = 500e3 / OMEGA_G
    return params_n1.replace(D_p=15.0, T_m=T_a + 15.0 * OMEGA_G)


@pytest.fixture(scope="session")
def equilibria_n30(params_n30):
    return sc.solve_equilibria(params_n30)


def agrees_with_printed(value: float, printed: str, rel: float = 0.01) -> bool:
    """True when ``value`` matches a printed reference figure.

    Accepts agreement within ``rel`` relative, or within half a unit in the
    last printed decimal place (published values are rounded).
    """
    target = float(printed)
    if abs(value - target) <= rel * abs(target):
        return True
    decimals = len(printed.split(".")[1]) if "." in printed else 0
    return abs(value - target) <= 0.5 * 10.0 ** (-decimals)
