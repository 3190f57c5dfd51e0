import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

BESSEL = "x*Dx^2 + Dx - x"
LOG = "x*Dx^2 + Dx"
ERF = "Dx^2 + 2*x*Dx"
APERY = ("x^2*(x^2-34*x+1)*Dx^4 + 5*x*(2*x^2-51*x+1)*Dx^3"
         " + (25*x^2-418*x+4)*Dx^2 + (15*x-117)*Dx + 1")
KOUTSCHAN = (
    "(-1+x)*x^3*(2+x)*(3+x)*(6+x)*(8+x)*(4+3*x)^2*Dx^4"
    " + 2*x^2*(4+3*x)*(-3456-2304*x+3676*x^2+4920*x^3+2079*x^4+356*x^5+21*x^6)*Dx^3"
    " + 6*x*(-5376-5248*x+11080*x^2+25286*x^3+19898*x^4+7432*x^5+1286*x^6+81*x^7)*Dx^2"
    " + 12*(-384+224*x+3716*x^2+7633*x^3+6734*x^4+2939*x^5+604*x^6+45*x^7)*Dx"
    " + 12*x*(256+632*x+702*x^2+382*x^3+98*x^4+9*x^5)")
CALABI_YAU = ("(x*Dx)^4 - x*(65*(x*Dx)^4 + 130*(x*Dx)^3 + 105*(x*Dx)^2 + 40*x*Dx + 6)"
              " + 4*x^2*(4*x*Dx + 3)*(x*Dx + 1)^2*(4*x*Dx + 5)")


@pytest.fixture(scope="session")
def apery():
    from holomnum import parse_operator
    return parse_operator(APERY)


@pytest.fixture(scope="session")
def koutschan():
    from holomnum import parse_operator
    return parse_operator(KOUTSCHAN)
