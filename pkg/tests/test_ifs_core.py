import logging
import math
from fractions import Fraction

import numpy as np
import pytest

from safd import build_model, load_model
from safd.ifs_core import (
    compose_word,
    counterexample_ifs,
    format_word,
    has_distinct_exponents,
    induce_model,
    induce_on_coords,
    level_maps,
    lyapunov_exponents,
    model_to_dict,
    parse_word,
    shannon_entropy,
    truncated_coding,
)
from safd.types import NumberMode
from tests.common import FIXTURES, MODELS, load_data, random_model

# {word text: word}
WORDS: dict[str, tuple[int, ...]] = {
    "": (),
    "0": (0,),
    "012": (0, 1, 2),
    "10.3.11": (10, 3, 11),
}


def test_fixtures_load():
    for name in FIXTURES:
        model = MODELS[name]
        assert model.name == name
        assert model.mode is NumberMode.EXACT, name
        assert sum(model.p) == 1, name


def test_exact_mode_inference():
    exact = build_model({"maps": [{"r": ["1/3"], "t": [0]}, {"r": ["1/3"], "t": [0.5]}]})
    assert exact.mode is NumberMode.EXACT
    assert exact.ifs.maps[1].offsets == (Fraction(1, 2),)
    floats = build_model({"maps": [{"r": [0.25], "t": [0]}, {"r": [0.25], "t": [1]}]})
    assert floats.mode is NumberMode.FLOAT
    assert isinstance(floats.p[0], float)


def test_coordinates_sorted_by_exponent():
    swapped_axes = build_model(
        {"maps": [{"r": ["1/3", "1/2"], "t": ["0", "0"]}, {"r": ["1/3", "1/2"], "t": ["2/3", "1/2"]}]}
    )
    assert swapped_axes.coordinate_order == (1, 0)
    chi = lyapunov_exponents(swapped_axes)
    assert chi[0] < chi[1]
    assert swapped_axes.sorted_coord(0) == 1
    assert swapped_axes.to_user_order(("a", "b")) == ("b", "a")


def test_model_to_dict_keeps_user_order():
    data = {
        "d": 2,
        "maps": [{"r": ["1/3", "1/2"], "t": ["0", "0"]}, {"r": ["1/3", "1/2"], "t": ["2/3", "1/2"]}],
        "p": ["1/4", "3/4"],
        "name": "axes",
    }
    assert model_to_dict(build_model(data)) == data


def test_lyapunov_exponents():
    data = load_data("dimensions")
    for name, expected in data.items():
        assert lyapunov_exponents(MODELS[name]) == pytest.approx(expected["chi"], abs=1e-12), name
        assert shannon_entropy(MODELS[name].p) == pytest.approx(expected["entropy"], abs=1e-12), name


def test_equal_exponents_warning(caplog):
    with caplog.at_level(logging.WARNING, logger="safd.ifs_core"):
        model = load_model("swapped")
    assert not has_distinct_exponents(model)
    assert any(getattr(r, "safd_event", None) == "equal_exponents" for r in caplog.records)


def test_compose_word():
    cantor = MODELS["cantor"].ifs
    m = compose_word(cantor, (1, 0, 1))
    assert m.rates == (Fraction(1, 27),)
    assert m.offsets == (Fraction(2, 3) + Fraction(2, 27),)
    assert m.word == (1, 0, 1)
    identity = compose_word(cantor, ())
    assert identity.rates == (1,) and identity.offsets == (0,)


def test_compose_is_associative():
    ifs = MODELS["example_ab"].ifs
    a, b, c = (compose_word(ifs, w) for w in ((0,), (1, 0), (1,)))
    assert a.compose(b).compose(c) == a.compose(b.compose(c))
    assert a.compose(b).compose(c) == compose_word(ifs, (0, 1, 0, 1))


def test_signed_rates_compose():
    model = build_model({"maps": [{"r": ["-1/2"], "t": ["1"]}, {"r": ["1/3"], "t": ["0"]}]})
    m = compose_word(model.ifs, (0, 0))
    assert m.rates == (Fraction(1, 4),)
    assert m.offsets == (Fraction(1, 2),)
    assert m((Fraction(1),)) == (Fraction(3, 4),)


def test_level_maps():
    ifs = MODELS["overlap"].ifs
    level = level_maps(ifs, 3)
    assert len(level) == 27
    assert [m.word for m in level[:3]] == [(0, 0, 0), (0, 0, 1), (0, 0, 2)]
    assert level[5] == compose_word(ifs, level[5].word)


def test_truncated_coding_error_bound():
    rng = np.random.default_rng(7)
    model = random_model(rng, d=2, m=3)
    word = tuple(int(i) for i in rng.integers(0, 3, size=12))
    truncated = truncated_coding(model.ifs, word)
    for tail in ((0,) * 30, (1, 2) * 15):
        far = compose_word(model.ifs, word + tail).offsets
        for j in range(2):
            assert abs(far[j] - truncated.point[j]) <= truncated.error[j] + 1e-15


def test_induce_on_coords():
    ifs = MODELS["mcmullen"].ifs
    first = induce_on_coords(ifs, (0,))
    assert first.d == 1
    assert [m.rates for m in first.maps] == [(ifs.maps[0].rates[0],)] * 2
    assert induce_on_coords(ifs, (1, 0, 1)).d == 2
    induced = induce_model(MODELS["mcmullen"], (1,))
    assert induced.p == MODELS["mcmullen"].p


def test_parse_and_format_words():
    for text, word in WORDS.items():
        assert parse_word(text) == word, text
        assert format_word(word) == text, text


def test_counterexample_ifs():
    ifs = counterexample_ifs("3/4", 4)
    assert ifs.size == 16
    assert ifs.is_homogeneous
    rate = Fraction(3, 4) ** 4
    assert ifs.maps[0].rates == (rate, rate)
    top = sum(Fraction(3, 4) ** k for k in range(4))
    assert ifs.maps[0].offsets == (top, 0)
    assert ifs.maps[-1].offsets == (0, top)
    assert ifs.maps[5].offsets[0] == ifs.maps[5].offsets[1]


def test_float_model_from_random_rates():
    rng = np.random.default_rng(1)
    for _ in range(20):
        model = random_model(rng, d=3, m=4)
        assert model.mode is NumberMode.FLOAT
        chi = lyapunov_exponents(model)
        assert all(a <= b for a, b in zip(chi, chi[1:]))
        assert math.isclose(sum(model.p), 1.0)
