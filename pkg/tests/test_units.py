from fractions import Fraction

import pytest

from seedgrade.errors import DimensionMismatch, NoNumber, UnknownUnit
from seedgrade.units import (
    BASE_UNITS,
    Quantity,
    UnitTable,
    compare_quantities,
    parse_quantity,
)


def dim(**kw):
    d = [Fraction(0)] * 7
    for unit, exp in kw.items():
        d[BASE_UNITS.index(unit)] = Fraction(exp)
    return tuple(d)


class TestParseQuantity:
    def test_scientific_notation(self):
        q = parse_quantity(r"3.0 \times 10^{8} m/s")
        assert q.magnitude == pytest.approx(3e8)
        assert q.dimension == dim(m=1, s=-1)

    def test_e_notation(self):
        q = parse_quantity("3.0e8 m/s")
        assert q.magnitude == pytest.approx(3e8)

    def test_bare_power_of_ten(self):
        q = parse_quantity("10^{-3} m")
        assert q.magnitude == pytest.approx(1e-3)

    def test_prefix(self):
        assert parse_quantity("2 km").magnitude == pytest.approx(2000)
        assert parse_quantity("5 meV").magnitude == pytest.approx(5e-3 * 1.602176634e-19)

    def test_kg_is_exact_before_prefix_split(self):
        q = parse_quantity("1 kg")
        assert q.magnitude == pytest.approx(1.0)
        assert q.dimension == dim(kg=1)

    def test_compound_units(self):
        q = parse_quantity(r"2 J \cdot s")
        assert q.dimension == dim(m=2, kg=1, s=-1)

    def test_exponents(self):
        q = parse_quantity("9.8 m/s^2")
        assert q.dimension == dim(m=1, s=-2)

    def test_detached_micro_prefix(self):
        q = parse_quantity(r"3 \mu m")
        assert q.magnitude == pytest.approx(3e-6)
        assert q.dimension == dim(m=1)

    def test_dimensionless(self):
        q = parse_quantity("0.5")
        assert q.dimension == dim()

    def test_no_number(self):
        with pytest.raises(NoNumber):
            parse_quantity("m/s")

    def test_unknown_unit(self):
        with pytest.raises(UnknownUnit):
            parse_quantity("3 florps")


class TestCompare:
    def test_within_rtol(self):
        a = parse_quantity("3.0e8 m/s")
        b = parse_quantity("299792458 m/s")
        assert compare_quantities(a, b, rtol=1e-2)

    def test_outside_rtol(self):
        a = parse_quantity("3.2e8 m/s")
        b = parse_quantity("299792458 m/s")
        assert not compare_quantities(a, b, rtol=1e-2)

    def test_cross_unit(self):
        a = parse_quantity("1 eV")
        b = parse_quantity("1.602e-19 J")
        assert compare_quantities(a, b, rtol=1e-2)

    def test_dimension_mismatch_raises(self):
        a = parse_quantity("1 J")
        b = parse_quantity("1 C")
        with pytest.raises(DimensionMismatch):
            compare_quantities(a, b)

    def test_zero_ground_truth_uses_scale(self):
        z = parse_quantity("0 m")
        assert compare_quantities(parse_quantity("0.001 m"), z, rtol=1e-2)
        assert not compare_quantities(parse_quantity("1 m"), z, rtol=1e-2)

    def test_bad_rtol(self):
        with pytest.raises(ValueError):
            compare_quantities(parse_quantity("1 m"), parse_quantity("1 m"), rtol=0)


class TestUnitTable:
    def test_from_text(self):
        t = UnitTable.from_text("pc = 3.0857e16 ; m\n# comment\n")
        d, s = t.resolve("pc")
        assert d == dim(m=1)
        assert s == pytest.approx(3.0857e16)
        # prefixes compose with custom entries
        d, s = t.resolve("kpc")
        assert s == pytest.approx(3.0857e19)

    def test_duplicate_token_rejected(self):
        with pytest.raises(ValueError):
            UnitTable.from_text("m = 1 ; m\nm = 2 ; m\n")

    def test_rational_exponent(self):
        t = UnitTable.from_text("weird = 2 ; m^1/2\n")
        d, _ = t.resolve("weird")
        assert d == dim(m=Fraction(1, 2))

    def test_finite_magnitude_required(self):
        with pytest.raises(ValueError):
            Quantity(float("inf"), dim())
