import csv
import json
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sympt.campaign import CSV_COLUMNS, CampaignConfig, run_campaign, run_seed
from sympt.cli import main
from sympt.extremal import find_direction
from sympt.reports import classify_file, reproduce_rank_table
from sympt.spectra import RankProfile
from sympt.statefile import StateFileError, dumps_state, load_state, loads_state, save_state
from sympt.symcore import InvalidInputError, ProductVector, SymmetricState, random_state

seeds = st.integers(0, 2**32 - 1)


# -- state files -----------------------------------------------------------

@given(seeds, st.integers(1, 12))
def test_state_file_round_trip_is_byte_identical(seed, n):
    s = random_state(n, np.random.default_rng(seed))
    text = dumps_state(s, 1e-8)
    loaded, tol = loads_state(text)
    assert tol == 1e-8
    np.testing.assert_array_equal(loaded.matrix, s.matrix)
    assert dumps_state(loaded, tol) == text


def test_state_file_layout(tmp_path):
    path = save_state(tmp_path / "s.json", SymmetricState.maximally_mixed(2), 1e-8)
    doc = json.loads(path.read_text())
    assert doc["format"] == "sympt-state-v1"
    assert doc["n_qubits"] == 2
    assert len(doc["matrix"]) == 9
    assert doc["matrix"][0] == [1 / 3, 0]


def _doc(**overrides):
    doc = json.loads(dumps_state(SymmetricState.maximally_mixed(2), 1e-8))
    doc.update(overrides)
    return json.dumps(doc)


@pytest.mark.parametrize("text,needle", [
    ("{not json", "1:2"),
    ("[]", "top level"),
    (_doc(format="other"), "'format'"),
    (_doc(n_qubits=0), "'n_qubits'"),
    (_doc(n_qubits=True), "'n_qubits'"),
    (_doc(rank_tol=-1), "'rank_tol'"),
    (_doc(matrix=[[1, 0]]), "'matrix'"),
    (_doc(matrix=[[1, 0]] * 8 + [["a", 0]]), "matrix[8]"),
    (_doc(matrix=[[1, 0], [0.1, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0]]), "Hermitian"),
    (_doc(matrix=[[1, 0], [0, 0], [0, 0], [0, 0], [1, 0], [0, 0], [0, 0], [0, 0], [0, 0]]), "trace"),
])
def test_malformed_state_files(text, needle):
    with pytest.raises(StateFileError, match=None) as info:
        loads_state(text, "f.json")
    assert needle in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(StateFileError):
        load_state(tmp_path / "absent.json")


# -- campaigns -------------------------------------------------------------

def test_config_validation(tmp_path):
    with pytest.raises(InvalidInputError):
        CampaignConfig(3, 10)
    with pytest.raises(InvalidInputError):
        CampaignConfig(4, 0)
    with pytest.raises(InvalidInputError):
        CampaignConfig(4, 1, target_profile=RankProfile((5, 9, 9)))


def test_run_seed_is_pure():
    assert run_seed(7, 3) == run_seed(7, 3)
    assert len({run_seed(7, i) for i in range(100)}) == 100
    assert run_seed(7, 0) != run_seed(8, 0)


def test_campaign_independent_of_parallelism(tmp_path):
    serial = run_campaign(CampaignConfig(4, 24, seed=3, output_dir=tmp_path / "a"))
    parallel = run_campaign(CampaignConfig(4, 24, seed=3, output_dir=tmp_path / "b", parallelism=3))
    assert [r.csv_row()[:6] for r in serial.records] == [r.csv_row()[:6] for r in parallel.records]
    assert serial.profile_frequencies == parallel.profile_frequencies
    for name in sorted(os.listdir(tmp_path / "a" / "states")):
        assert (tmp_path / "a" / "states" / name).read_bytes() == (tmp_path / "b" / "states" / name).read_bytes()


def test_campaign_outputs(tmp_path):
    rep = run_campaign(CampaignConfig(4, 30, seed=1, output_dir=tmp_path))
    assert sum(rep.profile_frequencies.values()) == 30
    assert rep.extremal_entangled_fraction == len(rep.entangled_records) / 30
    with open(tmp_path / "runs.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert [int(r[0]) for r in rows[1:]] == list(range(30))
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["runs"] == 30
    assert sum(report["profile_frequencies"].values()) == 30
    saved = sorted((tmp_path / "states").iterdir())
    assert len(saved) == len(rep.entangled_records) > 0
    for path in saved:
        s, tol = load_state(path)
        assert find_direction(s, tol=tol) is None
        text = path.read_text()
        save_state(tmp_path / "copy.json", s, tol)
        assert (tmp_path / "copy.json").read_text() == text


def test_unwritable_output_dir_fails_before_running(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        run_campaign(CampaignConfig(4, 10 ** 6, output_dir=blocker / "sub"))


# -- classify_file and the CLI ----------------------------------------------

@pytest.fixture(scope="module")
def saved_extremal(tmp_path_factory):
    out = tmp_path_factory.mktemp("camp")
    rep = run_campaign(CampaignConfig(4, 20, seed=7, output_dir=out))
    return next(iter(rep.state_files.values()))


def test_classify_extremal_file(saved_extremal, capsys):
    rep = classify_file(saved_extremal)
    assert rep.profile == RankProfile((5, 7, 8))
    assert rep.classification.verdict.value == "CandidateEntangled"
    assert not rep.edge.found
    assert rep.schmidt_bound == 2
    assert rep.nullity == 1
    assert main(["classify", str(saved_extremal)]) == 1
    assert "Schmidt bound:  2" in capsys.readouterr().out


def test_classify_product_mixture(tmp_path, capsys):
    s = SymmetricState.product_mixture(4, [0.4, 0.6], [ProductVector(1, 0.3), ProductVector(0.5, -1j)])
    path = save_state(tmp_path / "mix.json", s, 1e-8)
    assert main(["classify", "--json", str(path)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["verdict"] == "Separable"
    assert "constructive-certificate" in doc["triggered_rules"]
    assert doc["certificate_terms"] == 2


def test_classify_npt_state(tmp_path):
    path = save_state(tmp_path / "dicke.json", SymmetricState.dicke(4, 2), 1e-8)
    rep = classify_file(path)
    assert rep.classification.triggered_rules == ("not-ppt",)
    assert rep.exit_code == 1


def test_exit_codes_follow_verdicts():
    from sympt.classify import Verdict
    from sympt.reports import EXIT_CODES

    assert EXIT_CODES == {Verdict.SEPARABLE: 0, Verdict.CANDIDATE_ENTANGLED: 1,
                          Verdict.GENERICALLY_SEPARABLE: 2}


def test_classify_malformed_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    doc = json.loads(_doc())
    doc["matrix"][1] = [0.2, 0]
    path.write_text(json.dumps(doc))
    assert main(["classify", str(path)]) == 64
    assert "Hermitian" in capsys.readouterr().err


def test_search_command(tmp_path, capsys):
    assert main(["search", "--qubits", "4", "--runs", "10", "--seed", "2", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "extremal entangled fraction" in out
    assert (tmp_path / "runs.csv").exists()


def test_search_target_ranks(capsys):
    assert main(["search", "--qubits", "4", "--runs", "3", "--target-ranks", "5,7,8"]) == 0
    assert "(5,7,8)" in capsys.readouterr().out


def test_search_rejects_bad_qubits(capsys):
    assert main(["search", "--qubits", "3", "--runs", "3"]) == 2


def test_oracle_check_command(capsys):
    assert main(["oracle-check", "--qubits", "5", "--states", "5"]) == 0
    assert capsys.readouterr().out.count("PASS") == 4


def test_table_command(tmp_path, capsys):
    assert main(["table", "--qubits", "5", "--runs", "30", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "(5,7,8)" in out and "(6,10,10)" in out
    assert "MISMATCH" not in out
    assert json.loads((tmp_path / "rank_table.json").read_text())[0]["n_qubits"] == 4


def test_reproduce_rank_table_cross_check():
    table = reproduce_rank_table(6, 20, seed=1)
    assert table.ok
    for row in table.rows:
        assert row.exclusion_consistent
        assert not row.excluded_hits
    assert table.rows[1].expected == {(6, 10, 10)}
