import csv
import io
import subprocess
import sys

import pytest

from oracles import sylvester_hadamard
from pca_index import compute_competitiveness, default_schema, parse_dataset, validate
from pca_index.cli import main

SCHEMA3 = "A,a1,inc\nA,a2,dec\nB,b1,inc\n"


def run(*argv):
    """Run the CLI in-process, returning (exit code, stdout bytes, stderr text)."""
    out, err = io.BytesIO(), io.StringIO()

    wrapper = io.TextIOWrapper(out, encoding="utf-8")
    old_out, old_err = sys.stdout, sys.stderr
    sys.stdout, sys.stderr = wrapper, err
    try:
        try:
            code = main([str(a) for a in argv])
        except SystemExit as exc:
            code = exc.code
        sys.stdout.flush()
    finally:
        sys.stdout, sys.stderr = old_out, old_err
    data = out.getvalue()
    wrapper.detach()
    return code, data, err.getvalue()


def rows(data: bytes):
    return list(csv.reader(io.StringIO(data.decode("utf-8"))))


@pytest.fixture(scope="module")
def synth_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("synth") / "synth.csv"
    code, _, _ = run("synth", "--shape", "34x641", "--seed", "1", "--out", path)
    assert code == 0
    return str(path)


@pytest.fixture
def small(write):
    schema = write("s.csv", SCHEMA3)
    data = write(
        "d.csv",
        "entity_id,a1,a2,b1,zz\n"
        "p,1,9,3,0\n"
        "q,4,2,8,0\n"
        "r,10,5,1,0\n"
        "s,7,7,6,0\n",
    )
    return schema, data


class TestRank:
    def test_leaders_and_outsiders(self, synth_csv):
        code, out, _ = run("rank", "--data", synth_csv, "--top", 15, "--bottom", 15)
        assert code == 0
        table = rows(out)
        assert table[0] == ["rank", "entity_id", "index"]
        assert [int(r[0]) for r in table[1:]] == list(range(1, 16)) + list(range(627, 642))

    def test_full_table(self, small):
        schema, data = small
        code, out, err = run("rank", "--data", data, "--schema", schema)
        assert code == 0
        assert len(rows(out)) == 5
        assert "ignored extra column 'zz'" in err
        assert out.endswith(b"\n") and b"\r" not in out

    def test_matches_engine(self, small):
        schema, data = small
        _, out, _ = run("rank", "--data", data, "--schema", schema)
        from pca_index import parse_schema

        s = parse_schema(SCHEMA3)
        ds = parse_dataset(open(data).read(), s)
        rep = compute_competitiveness(ds, s)
        printed = {r[1]: r[2] for r in rows(out)[1:]}
        assert printed == {e: format(v, ".6f") for e, v in rep.scores().items()}

    def test_empty_file(self, write):
        path = write("empty.csv", "")
        code, out, err = run("rank", "--data", path)
        assert code == 1
        assert path in err and out == b""

    def test_missing_file(self, tmp_path):
        code, _, err = run("rank", "--data", tmp_path / "nope.csv")
        assert code == 1 and "nope.csv" in err

    def test_out_file(self, small, tmp_path):
        schema, data = small
        target = tmp_path / "r.csv"
        code, out, _ = run("rank", "--data", data, "--schema", schema, "--out", target)
        assert code == 0 and out == b""
        assert target.read_bytes().startswith(b"rank,entity_id,index\n")

    def test_ordinal_ties(self, write):
        schema = write("s.csv", "A,x,inc\nA,y,inc\n")
        data = write("d.csv", "entity_id,x,y\nb,1,2\na,1,2\nc,3,1\n")
        _, out, _ = run("rank", "--data", data, "--schema", schema)
        comp = [(r[0], r[1]) for r in rows(out)[1:]]
        _, out, _ = run("rank", "--data", data, "--schema", schema, "--ties", "ordinal")
        ordi = [(r[0], r[1]) for r in rows(out)[1:]]
        assert [e for _, e in comp] == [e for _, e in ordi]
        tied = [r for r, e in comp if e in ("a", "b")]
        assert tied[0] == tied[1]
        assert sorted(r for r, _ in ordi) == ["1", "2", "3"]


class TestPillars:
    def test_default_shape(self, synth_csv):
        code, out, _ = run("pillars", "--data", synth_csv)
        assert code == 0
        table = rows(out)
        assert table[0] == ["pillar", "rank", "entity_id", "score"]
        body = table[1:]
        assert len(body) == 50
        assert [r[0] for r in body] == [p for p in "ABCDE" for _ in range(10)]
        assert [int(r[1]) for r in body[:10]] == list(range(1, 11))

    def test_global_sum_reproduces_rank(self, small):
        schema, data = small
        _, out, _ = run("pillars", "--data", data, "--schema", schema, "--k", 4)
        _, ranked, _ = run("rank", "--data", data, "--schema", schema)
        sums = {}
        for p, _, e, v in rows(out)[1:]:
            sums[e] = sums.get(e, 0.0) + float(v)
        index = {e: float(v) for _, e, v in rows(ranked)[1:]}
        # printed values carry 6 decimals; each of the 2 pillars adds <= 5e-7 rounding
        assert all(abs(sums[e] - index[e]) <= 2 * 5e-7 + 5e-7 for e in index)

    def test_local_mode(self, small):
        schema, data = small
        code, out, _ = run("pillars", "--data", data, "--schema", schema, "--k", 4, "--mode", "local")
        assert code == 0
        assert all(1.0 <= float(r[3]) <= 10.0 for r in rows(out)[1:])

    def test_k_zero_is_usage_error(self, small):
        schema, data = small
        code, _, err = run("pillars", "--data", data, "--schema", schema, "--k", 0)
        assert code == 2 and "--k" in err

    def test_k_too_large(self, small):
        schema, data = small
        code, _, _ = run("pillars", "--data", data, "--schema", schema, "--k", 5)
        assert code == 1


class TestWeights:
    def test_total(self, synth_csv):
        code, out, _ = run("weights", "--data", synth_csv)
        assert code == 0
        table = rows(out)
        assert table[0] == ["indicator_code", "pillar_code", "effective_weight"]
        assert len(table) == 1 + 34 + 1
        assert table[-1] == ["TOTAL", "", "1.000000"]

    def test_isotropic(self, write):
        h = sylvester_hadamard(64)
        lines = ["entity_id," + ",".join(default_schema().codes)]
        for j in range(64):
            lines.append(f"u{j:02d}," + ",".join(str(h[i][j]) for i in range(1, 35)))
        data = write("iso.csv", "\n".join(lines) + "\n")
        _, out, _ = run("weights", "--data", data)
        weights = [float(r[2]) for r in rows(out)[1:-1]]
        assert len(weights) == 34
        assert all(abs(w - 0.029412) <= 1e-4 for w in weights)

    def test_constant_midpoint_prints_zero(self, write):
        schema = write("s.csv", SCHEMA3)
        data = write("d.csv", "entity_id,a1,a2,b1\np,1,5,3\nq,4,5,8\nr,10,5,1\n")
        code, _, err = run("weights", "--data", data, "--schema", schema)
        assert code == 1 and "a2" in err
        code, out, _ = run("weights", "--data", data, "--schema", schema, "--constant", "midpoint")
        assert code == 0
        assert rows(out)[2] == ["a2", "A", "0.000000"]

    def test_drop(self, write):
        schema = write("s.csv", SCHEMA3)
        data = write("d.csv", "entity_id,a1,a2,b1\np,1,5,3\nq,4,5,8\nr,10,5,1\n")
        code, out, err = run("weights", "--data", data, "--schema", schema, "--constant", "drop")
        assert code == 0 and "dropped constant indicator a2" in err
        assert [r[0] for r in rows(out)[1:]] == ["a1", "b1", "TOTAL"]


class TestExplain:
    def test_best_entity(self, write):
        schema = write("s.csv", SCHEMA3)
        data = write("d.csv", "entity_id,a1,a2,b1\ntop,9,1,9\nx,1,5,3\ny,4,9,1\n")
        code, out, _ = run("explain", "--data", data, "--schema", schema, "--entity", "top")
        assert code == 0
        table = rows(out)
        assert table[0] == [
            "indicator_code", "pillar_code", "normalized_value", "effective_weight", "contribution"
        ]
        body = [r for r in table[1:] if r[0] not in ("PILLAR", "TOTAL")]
        assert all(r[2] == "10.000000" for r in body)
        assert table[-1] == ["TOTAL", "", "", "", "10.000000"]

    def test_contributions_sum(self, small):
        schema, data = small
        _, out, _ = run("explain", "--data", data, "--schema", schema, "--entity", "q")
        table = rows(out)[1:]
        body = [r for r in table if r[0] not in ("PILLAR", "TOTAL")]
        contrib = [float(r[4]) for r in body]
        assert contrib == sorted(contrib, reverse=True)
        total = float(table[-1][4])
        assert abs(sum(contrib) - total) <= len(contrib) * 5e-7 + 5e-7
        pillars = [float(r[4]) for r in table if r[0] == "PILLAR"]
        assert abs(sum(pillars) - total) <= len(pillars) * 5e-7 + 5e-7

    def test_contributions_engine_identity(self, small):
        from pca_index import parse_schema

        schema, data = small
        s = parse_schema(SCHEMA3)
        rep = compute_competitiveness(validate(parse_dataset(open(data).read(), s), s).dataset, s)
        for j in range(len(rep.index)):
            contrib = sum(w * row[j] for w, row in zip(rep.effective_weights, rep.normalized.values))
            assert abs(contrib - rep.index[j]) <= 1e-10

    def test_unknown(self, small):
        schema, data = small
        code, _, err = run("explain", "--data", data, "--schema", schema, "--entity", "nope")
        assert code == 1 and "nope" in err

    def test_entity_required(self, small):
        schema, data = small
        code, _, _ = run("explain", "--data", data, "--schema", schema)
        assert code == 2


class TestValidateSynth:
    def test_clean(self, small):
        schema, data = small
        code, out, _ = run("validate", "--data", data, "--schema", schema)
        assert code == 0
        assert out.decode().startswith("0 entities excluded\n")

    def test_deficient_entity(self, write):
        schema = write("s.csv", SCHEMA3)
        data = write("d.csv", "entity_id,a1,a2,b1\np,1,2,3\nbad,,5,8\nr,10,5,1\n")
        code, out, _ = run("validate", "--data", data, "--schema", schema)
        assert code == 0
        text = out.decode()
        assert "1 entities excluded" in text and "excluded: bad" in text

    def test_constant_is_fatal_under_error_policy(self, write):
        schema = write("s.csv", SCHEMA3)
        data = write("d.csv", "entity_id,a1,a2,b1\np,1,2,3\nq,1,5,8\n")
        code, out, _ = run("validate", "--data", data, "--schema", schema)
        assert code == 1 and "constant: a1" in out.decode()
        code, _, _ = run("validate", "--data", data, "--schema", schema, "--constant", "drop")
        assert code == 0

    def test_synth_readable_by_every_command(self, synth_csv):
        ds = parse_dataset(open(synth_csv).read(), default_schema())
        assert (ds.n, ds.m) == (34, 641)
        for cmd in (["rank"], ["pillars"], ["weights"], ["validate"], ["explain", "--entity", "E001"]):
            code, _, _ = run(*cmd, "--data", synth_csv)
            assert code == 0, cmd

    def test_synth_shape_mismatch(self):
        code, _, err = run("synth", "--shape", "5x10")
        assert code == 1 and "34" in err

    @pytest.mark.parametrize("shape", ["34", "34x", "ax3", "0x5"])
    def test_bad_shape(self, shape):
        assert run("synth", "--shape", shape)[0] == 2


class TestOptions:
    def test_bounds_file(self, small, write):
        schema, data = small
        bounds = write("b.csv", "indicator_code,min,max\na1,0,20\na2,0,20\nb1,0,20\n")
        code, out, _ = run("rank", "--data", data, "--schema", schema, "--bounds", bounds)
        assert code == 0 and len(rows(out)) == 5

    def test_bounds_bad(self, small, write):
        schema, data = small
        bounds = write("b.csv", "a1,5,5\na2,0,1\nb1,0,1\n")
        assert run("rank", "--data", data, "--schema", schema, "--bounds", bounds)[0] == 1

    def test_divisor_flag_keeps_ranks(self, synth_csv):
        _, a, _ = run("rank", "--data", synth_csv)
        _, b, _ = run("rank", "--data", synth_csv, "--divisor", "m-1")
        ra, rb = rows(a)[1:], rows(b)[1:]
        assert [r[:2] for r in ra] == [r[:2] for r in rb]

    @pytest.mark.parametrize(
        "argv",
        [[], ["bogus"], ["rank", "--mode", "x"], ["rank", "--divisor", "n"], ["rank", "--top", "-1"]],
    )
    def test_usage_errors(self, argv):
        assert run(*argv)[0] == 2


def test_entry_point_subprocess(synth_csv):
    proc = subprocess.run(
        [sys.executable, "-m", "pca_index.cli", "rank", "--data", synth_csv, "--top", "1", "--bottom", "1"],
        capture_output=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.count(b"\n") == 3
