from cokernel_lab.seeds import derive_seed, make_rng, stable_digest


def test_derive_seed_stable_and_distinct():
    # pinned values: derivation must never change across versions, or every
    # recorded run becomes unreproducible
    assert derive_seed(0, 0) == derive_seed(0, 0)
    assert derive_seed(1, 2) != derive_seed(2, 1)
    assert derive_seed(7) != derive_seed(7, 0)
    assert 0 <= derive_seed(123, 456) < 2**64


def test_derive_seed_pinned_value():
    import hashlib

    want = int.from_bytes(
        hashlib.blake2b(b"5:9", digest_size=8).digest(), "little"
    )
    assert derive_seed(5, 9) == want


def test_make_rng_reproducible():
    a = make_rng(42).integers(0, 1_000_000, size=8)
    b = make_rng(42).integers(0, 1_000_000, size=8)
    assert (a == b).all()
    c = make_rng(43).integers(0, 1_000_000, size=8)
    assert (a != c).any()


def test_stable_digest():
    assert stable_digest(b"abc") == stable_digest(b"abc")
    assert stable_digest(b"abc") != stable_digest(b"abd")
    assert len(stable_digest(b"abc")) == 16
    assert len(stable_digest(b"abc", size=4)) == 8
