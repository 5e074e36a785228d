import numpy as np
import pytest

from qcorr import measurement
from qcorr.errors import DataFormatError, UninformativeMeasurementError
from qcorr.measurement import (
    born_probabilities,
    gram_normalize,
    load_counts_file,
    pauli_projectors,
    random_subset,
    simulate_counts,
    write_counts_file,
)
from qcorr.seeding import make_rng
from qcorr.states import named_state, sample_bures_state


class TestPauliProjectors:
    def test_two_qubit_count(self):
        assert pauli_projectors(2).full_size == 36

    def test_three_qubit_count(self):
        assert pauli_projectors(3).full_size == 216

    def test_basis_pairs_sum_to_identity(self):
        kets = measurement.BASIS_KETS
        for a, b in (("H", "V"), ("D", "A"), ("R", "L")):
            pa = np.outer(kets[a], kets[a].conj())
            pb = np.outer(kets[b], kets[b].conj())
            assert np.allclose(pa + pb, np.eye(2), atol=1e-12)

    def test_projector_properties(self):
        pset = pauli_projectors(2)
        for m in pset.projectors:
            assert np.linalg.norm(m - m.conj().T) < 1e-12
            assert np.linalg.norm(m @ m - m) < 1e-10
            assert abs(np.trace(m).real - 1.0) < 1e-12

    def test_canonical_label_order(self):
        labels = pauli_projectors(2).labels
        assert labels[:6] == ("HH", "HV", "HD", "HA", "HR", "HL")
        assert labels[6] == "VH"

    def test_rejects_other_counts(self):
        with pytest.raises(ValueError):
            pauli_projectors(4)


class TestBornProbabilities:
    def test_singlet_values(self):
        pset = pauli_projectors(2)
        rec = born_probabilities(named_state("singlet"), pset)
        by_label = dict(zip(pset.labels, rec.values))
        assert by_label["HH"] == pytest.approx(0.0, abs=1e-12)
        assert by_label["HV"] == pytest.approx(0.5, abs=1e-12)

    def test_maximally_mixed(self):
        pset = pauli_projectors(2)
        rec = born_probabilities(named_state("maximally_mixed_2q"), pset)
        assert np.allclose(rec.values, 0.25, atol=1e-12)

    def test_full_vector_sums_to_nine(self, rng):
        pset = pauli_projectors(2)
        rec = born_probabilities(sample_bures_state(2, rng), pset)
        assert rec.values.sum() == pytest.approx(9.0, abs=1e-9)

    def test_complete_bases_sum_to_one(self, rng):
        pset = pauli_projectors(2)
        rec = born_probabilities(sample_bures_state(2, rng), pset)
        groups = {}
        for label, value in zip(pset.labels, rec.values):
            groups.setdefault(measurement._basis_pattern(label), []).append(value)
        assert len(groups) == 9
        for vals in groups.values():
            assert sum(vals) == pytest.approx(1.0, abs=1e-10)


class TestRandomSubset:
    def test_full_size_mask(self, rng):
        pset = pauli_projectors(2)
        assert random_subset(pset, 36, rng).n_active == 36

    def test_k_active(self, rng):
        assert random_subset(pauli_projectors(2), 12, rng).n_active == 12

    def test_out_of_range(self, rng):
        with pytest.raises(ValueError):
            random_subset(pauli_projectors(2), 0, rng)
        with pytest.raises(ValueError):
            random_subset(pauli_projectors(2), 37, rng)

    def test_inclusion_frequency_uniform(self):
        rng = make_rng(17)
        pset = pauli_projectors(2)
        counts = np.zeros(36)
        n_draws = 20000
        for _ in range(n_draws):
            counts += random_subset(pset, 12, rng).active_mask
        freq = counts / n_draws
        assert np.all(np.abs(freq - 12 / 36) < 0.02 * (12 / 36) + 4 * np.sqrt((1 / 3) * (2 / 3) / n_draws))

    def test_canonical_order_preserved(self, rng):
        sub = random_subset(pauli_projectors(2), 10, rng)
        assert sub.labels == pauli_projectors(2).labels


class TestGramNormalize:
    def test_full_set_gram_is_nine_identity(self):
        pset = pauli_projectors(2)
        normalized, gram = gram_normalize(pset)
        assert np.allclose(gram, 9 * np.eye(4), atol=1e-10)
        assert np.allclose(normalized, pset.projectors / 9.0, atol=1e-10)

    def test_normalized_sums_to_identity(self, rng):
        pset = pauli_projectors(2)
        for _ in range(100):
            sub = random_subset(pset, int(rng.integers(8, 36)), rng)
            try:
                normalized, _ = gram_normalize(sub)
            except UninformativeMeasurementError:
                continue
            assert np.linalg.norm(normalized.sum(axis=0) - np.eye(4)) < 1e-10

    def test_rank_deficient_subset_rejected(self):
        pset = pauli_projectors(2)
        mask = np.zeros(36, dtype=bool)
        mask[0] = True  # HH alone spans a single ray
        with pytest.raises(UninformativeMeasurementError):
            gram_normalize(pset.with_mask(mask))


class TestSimulateCounts:
    def test_extreme_probabilities(self, rng):
        pset = pauli_projectors(2)
        rec = born_probabilities(named_state("product_hh"), pset)
        freqs = simulate_counts(rec, 1000, rng)
        by_label = dict(zip(pset.labels, freqs.values))
        assert by_label["HH"] == 1.0  # p = 1
        assert by_label["HV"] == 0.0  # p = 0

    def test_binomial_mean(self):
        rng = make_rng(31)
        pset = pauli_projectors(2)
        rec = born_probabilities(named_state("singlet"), pset)
        shots = 400
        reps = 2000
        idx = list(pset.labels).index("HV")  # p = 0.5
        total = sum(simulate_counts(rec, shots, rng).values[idx] for _ in range(reps))
        mean = total / reps
        sigma = np.sqrt(0.5 * 0.5 / shots / reps)
        assert abs(mean - 0.5) < 3 * sigma

    def test_zero_shots_rejected(self, rng):
        rec = born_probabilities(named_state("singlet"), pauli_projectors(2))
        with pytest.raises(ValueError):
            simulate_counts(rec, 0, rng)

    def test_requires_exact_born(self, rng):
        rec = born_probabilities(named_state("singlet"), pauli_projectors(2))
        freqs = simulate_counts(rec, 100, rng)
        with pytest.raises(ValueError):
            simulate_counts(freqs, 100, rng)


class TestCountsFile:
    def test_two_row_normalization(self, tmp_path):
        path = tmp_path / "counts.csv"
        path.write_text("label,counts\nHH,450\nHV,550\n")
        pset, rec = load_counts_file(path)
        assert pset.n_active == 2
        by_label = dict(zip(pset.labels, rec.values))
        assert by_label["HH"] == pytest.approx(0.45)
        assert by_label["HV"] == pytest.approx(0.55)

    def test_shots_column_overrides_grouping(self, tmp_path):
        path = tmp_path / "counts.csv"
        path.write_text("label,counts,shots\nHH,450,1000\nHV,550,2000\n")
        _, rec = load_counts_file(path)
        by_label = dict(zip(pauli_projectors(2).labels, rec.values))
        assert by_label["HH"] == pytest.approx(0.45)
        assert by_label["HV"] == pytest.approx(0.275)

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "counts.csv"
        path.write_text("# experiment 12\nlabel,counts\n\nHH,1\nHV,1\n")
        pset, _ = load_counts_file(path)
        assert pset.n_active == 2

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "counts.csv"
        path.write_text("")
        with pytest.raises(DataFormatError):
            load_counts_file(path)

    def test_unknown_label_rejected(self, tmp_path):
        path = tmp_path / "counts.csv"
        path.write_text("label,counts\nXX,100\n")
        with pytest.raises(DataFormatError):
            load_counts_file(path)

    def test_duplicate_label_rejected(self, tmp_path):
        path = tmp_path / "counts.csv"
        path.write_text("label,counts\nHH,100\nHH,50\n")
        with pytest.raises(DataFormatError):
            load_counts_file(path)

    def test_round_trip_with_writer(self, tmp_path):
        rng = make_rng(8)
        pset = pauli_projectors(2)
        rec = born_probabilities(sample_bures_state(2, rng), pset)
        counts = np.round(rec.values * 10000)
        path = tmp_path / "counts.csv"
        write_counts_file(path, pset.labels, counts, shots=[10000] * 36)
        pset2, rec2 = load_counts_file(path)
        assert pset2.n_active == 36
        assert np.allclose(rec2.values, counts / 10000)

    def test_already_normalized(self, tmp_path):
        path = tmp_path / "probs.csv"
        path.write_text("label,counts\nHH,0.25\nHV,0.25\nVH,0.25\nVV,0.25\n")
        _, rec = load_counts_file(path, already_normalized=True)
        assert np.isclose(rec.values[rec.active_mask], 0.25).all()

    def test_mask_reflects_rows(self, tmp_path):
        path = tmp_path / "counts.csv"
        path.write_text("label,counts\nHH,10\nHV,30\nDD,25\nDA,25\n")
        pset, rec = load_counts_file(path)
        assert pset.n_active == 4
        assert rec.active_mask.sum() == 4
