from fcaf.seeding import derive_seed, make_rng


def test_derive_seed_is_stable():
    assert derive_seed(7, "independence", 3) == derive_seed(7, "independence", 3)


def test_labels_separate_streams():
    assert derive_seed(7, "independence", 3) != derive_seed(7, "independence", 4)
    assert derive_seed(7, "symmetry") != derive_seed(8, "symmetry")


def test_rng_reproduces_sequence():
    a = make_rng(11, "probe").random(5)
    b = make_rng(11, "probe").random(5)
    assert list(a) == list(b)
