import json
import math

import numpy as np
import pytest

from lemni.generator import GenSpec, SplitMix64, draw_roots, generate, stream_output
from lemni.io import dumps_instance

from .conftest import FIXTURES


def test_splitmix_reference_outputs():
    # published reference values for SplitMix64
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF
    rng = SplitMix64(1234567)
    assert [rng.next_u64() for _ in range(5)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423,
        4593380528125082431, 16408922859458223821,
    ]


def test_stream_output_random_access():
    rng = SplitMix64(99)
    seq = [rng.next_u64() for _ in range(10)]
    assert [stream_output(99, i) for i in range(10)] == seq


def test_uniform_in_unit_interval():
    rng = SplitMix64(3)
    xs = [rng.uniform() for _ in range(10000)]
    assert min(xs) >= 0.0 and max(xs) < 1.0


def test_deterministic():
    assert generate(GenSpec(2, 17)) == generate(GenSpec(2, 17))
    assert generate(GenSpec(2, 17)) != generate(GenSpec(2, 18))


@pytest.mark.parametrize("seed", range(20))
def test_moduli_below_one(seed):
    inst = generate(GenSpec(5, seed))
    assert inst.degree == 5
    assert np.all(np.abs(inst.locations) < 1)


def test_draw_order_moduli_then_arguments():
    rng = SplitMix64(5)
    u = [rng.uniform() for _ in range(6)]
    roots = draw_roots(GenSpec(3, 5))
    for k, (z, m) in enumerate(roots):
        assert abs(z) == pytest.approx(u[k], rel=1e-15)
        assert math.atan2(z.imag, z.real) % (2 * math.pi) == pytest.approx(2 * math.pi * u[3 + k], abs=1e-12)
        assert m == 1


def _ks_uniform(sample, lo, hi):
    x = np.sort((np.asarray(sample) - lo) / (hi - lo))
    n = len(x)
    cdf_hi = np.arange(1, n + 1) / n
    cdf_lo = np.arange(n) / n
    return float(max(np.max(cdf_hi - x), np.max(x - cdf_lo)))


def test_argument_distribution_kolmogorov():
    roots = draw_roots(GenSpec(10000, 2024))
    args = [math.atan2(z.imag, z.real) % (2 * math.pi) for z, _ in roots]
    assert _ks_uniform(args, 0, 2 * math.pi) <= 0.02
    moduli = [abs(z) for z, _ in roots]
    assert _ks_uniform(moduli, 0, 1) <= 0.02


def test_multiplicity_weights():
    inst = generate(GenSpec(300, 1, (0.0, 0.0, 1.0)))
    assert all(r.multiplicity == 3 for r in inst.roots)
    mixed = draw_roots(GenSpec(3000, 2, (0.5, 0.3, 0.2)))
    counts = np.bincount([m for _, m in mixed], minlength=4)[1:] / 3000
    assert counts == pytest.approx([0.5, 0.3, 0.2], abs=0.04)


@pytest.mark.parametrize("bad", [0, -3, 1.5])
def test_invalid_spec(bad):
    with pytest.raises(ValueError):
        GenSpec(bad)


def test_invalid_weights():
    with pytest.raises(ValueError):
        GenSpec(2, 0, (0, 0, 0))


@pytest.mark.parametrize("name, n, seed", [
    ("golden_seed7.json", 2, 7),
    ("golden_seed42.json", 4, 42),
    ("golden_seed2026.json", 5, 2026),
])
def test_golden_instances(name, n, seed):
    text = (FIXTURES / name).read_text()
    assert dumps_instance(generate(GenSpec(n, seed)), seed) == text
    data = json.loads(text)
    assert data["seed"] == seed and len(data["roots"]) == n
