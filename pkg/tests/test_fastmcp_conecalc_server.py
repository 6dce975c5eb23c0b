"""MCP tool wrappers"""

import pytest

import fastmcp_conecalc_server as server
from cone_geometry import Dilatation, Inversion, SpecialConformal, Translation


def _call(tool, *args, **kwargs):
    return getattr(tool, "fn", tool)(*args, **kwargs)


@pytest.mark.unit
class TestConeCalcTools:

    @pytest.mark.parametrize("op, kind", [
        ("translate", Translation),
        ("special", SpecialConformal),
        ("dilate", Dilatation),
        ("inversion", Inversion),
    ])
    def test_transform_names(self, op, kind):
        assert isinstance(server._transform(op, 0.1, 0.0, 0.0, 0.0, 0.2), kind)

    def test_unknown_transform(self):
        with pytest.raises(ValueError):
            server._transform("warp", 0, 0, 0, 0, 0)

    def test_classify(self):
        text = _call(server.classify_q2, 2.0)
        assert "domain II" in text and "hyperboloid 2" in text and "q5^2 = 3.0" in text

    def test_errors_are_reported_as_text(self):
        assert _call(server.classify_q2, 0.5, M=0.0).startswith("Error:")
        assert _call(server.transform, 0, 0, 0, 0, "inversion").startswith("Error:")
        assert _call(server.fermion_branches, 2.0, 2.0).startswith("Error:")

    def test_transform_inversion(self):
        text = _call(server.transform, 2.0, 0.0, 0.0, 0.0, "inversion")
        assert text.startswith("inversion(2.0, 0.0, 0.0, 0.0) = (-0.5,")

    def test_charged_mass_pair(self):
        assert "(physical)" in _call(server.charged_mass_pair, -0.6, 0.4)
        assert "(unphysical)" in _call(server.charged_mass_pair, 0.6, 0.4)

    def test_fermion_branches(self):
        assert _call(server.fermion_branches, 1.0, 1.0) == "alpha+^2 = 0.5 or 0.5"
