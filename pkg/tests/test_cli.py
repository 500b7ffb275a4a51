import json
import math

from ergolab.cli import (
    canonical_payload,
    main,
    parse_config,
    run,
    verify_records,
)


def make_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


SHIFT_PRESSURE = {
    "system": "full_shift_2",
    "potential": {"kind": "locally_constant", "values": [0.2, 0.5], "k": 2},
    "scales": {"delta": "0.4", "eps": "0.0"},
    "n_range": [4, 14],
    "grid": {"kind": "cylinders"},
    "seed": 1,
}

SHIFT_CT = {
    "system": "full_shift_2",
    "potential": {"kind": "zero"},
    "scales": {"delta": "0.0001", "eps": "0.25", "r": "0.25", "a": "0.4"},
    "n_range": [2, 10],
    "grid": {"kind": "cylinders"},
    "seed": 3,
    "spec_pairs": 20,
}


def test_cli_pressure_and_jsonl(tmp_path, capsys):
    out = str(tmp_path / "res.jsonl")
    cfg = make_config(tmp_path, {**SHIFT_PRESSURE, "out": out})
    code = main(["pressure", "--config", cfg])
    assert code == 0
    text = capsys.readouterr().out
    assert "slope_lower" in text
    valid, corrupt = verify_records(out)
    assert (valid, corrupt) == (1, 0)
    rec = json.loads(open(out).read().splitlines()[0])
    oracle = math.log(math.exp(0.2) + math.exp(0.5))
    assert abs(rec["payload"]["slope_lower"] - oracle) < 1e-6
    # append-only: second run adds a line
    main(["pressure", "--config", cfg])
    assert verify_records(out) == (2, 0)


def test_cli_ct_report_exit_codes(tmp_path):
    out = str(tmp_path / "res.jsonl")
    good = make_config(tmp_path, {**SHIFT_CT, "out": out}, "good.json")
    assert main(["ct-report", "--config", good]) == 0
    bad_scales = dict(SHIFT_CT)
    bad_scales["scales"] = {**SHIFT_CT["scales"], "delta": "0.00025"}
    flagged = make_config(tmp_path, {**bad_scales, "out": out}, "flag.json")
    assert main(["ct-report", "--config", flagged]) == 1


def test_cli_invalid_config_exit_2_no_record(tmp_path, capsys):
    out = tmp_path / "res.jsonl"
    bad = make_config(tmp_path, {
        "system": "full_shift_2",
        "scales": {"eps": "-0.1", "delta": "0"},
        "out": str(out),
    })
    assert main(["pressure", "--config", bad]) == 2
    assert not out.exists()
    missing = make_config(tmp_path, {"scales": {}}, "missing.json")
    assert main(["pressure", "--config", missing]) == 2
    assert main(["pressure", "--config", str(tmp_path / "nope.json")]) == 2


def test_payload_determinism_across_workers(tmp_path):
    cfg1 = parse_config(SHIFT_PRESSURE, {"workers": 1})
    cfg8 = parse_config(SHIFT_PRESSURE, {"workers": 8})
    rec1, _ = run("pressure", cfg1)
    rec8, _ = run("pressure", cfg8)
    assert canonical_payload(rec1.payload) == canonical_payload(rec8.payload)
    assert rec1.config_hash == rec8.config_hash


def test_cli_decompose_cocycle_reproducible(tmp_path):
    doc = {
        "system": {
            "variant": "cocycle_toy",
            "forward": {
                "c1": {"values": [-0.5, -0.4, -0.6, -0.3, -0.5, -0.45,
                                  -0.5, -0.4], "lo": 0},
                "c2": {"values": [-0.2, -0.1, -0.3, -0.2, -0.25, -0.15,
                                  -0.2, -0.1], "lo": 0},
            },
            "backward": {
                "c1": {"values": [-0.3, -0.2, -0.4, -0.3, -0.35, -0.25,
                                  -0.3, -0.2], "lo": 0},
                "c2": {"values": [-0.6, -0.5, -0.7, -0.6, -0.65, -0.55,
                                  -0.6, -0.5], "lo": 0},
            },
        },
        "potential": {"kind": "zero"},
        "scales": {"delta": "0.1", "eps": "0.0", "r": "0.35"},
        "segments": {"count": 3, "n": 7},
        "seed": 9,
    }
    cfg = parse_config(doc, {})
    rec_a, _ = run("decompose", cfg)
    rec_b, _ = run("decompose", cfg)
    assert canonical_payload(rec_a.payload) == canonical_payload(rec_b.payload)
    for item in rec_a.payload["records"]:
        assert item["p"] + item["g"] + item["s"] == item["n"]


def test_cli_spec_check_and_minimality(tmp_path):
    out = str(tmp_path / "res.jsonl")
    spec_doc = {
        "system": "cat_map",
        "scales": {"delta": "0.05", "r": "0.3"},
        "pairs": 5,
        "segment_len": 8,
        "seed": 2,
        "out": out,
    }
    assert main(["spec-check", "--config", make_config(tmp_path, spec_doc,
                                                       "sc.json")]) == 0
    mini_doc = {
        "system": "cat_map",
        "scales": {"eps": "0.08"},
        "target_resolution": 24,
        "seeds": 1,
        "seed": 4,
        "out": out,
    }
    assert main(["minimality", "--config", make_config(tmp_path, mini_doc,
                                                       "mini.json")]) == 0
    rec = json.loads(open(out).read().splitlines()[-1])
    assert rec["payload"]["R0"] is not None


def test_checksum_detects_corruption(tmp_path):
    out = str(tmp_path / "res.jsonl")
    cfg = make_config(tmp_path, {**SHIFT_PRESSURE, "out": out})
    main(["pressure", "--config", cfg])
    lines = open(out).read().splitlines()
    broken = lines[0].replace("slope_lower", "slope_lower_x", 1)
    with open(out, "a") as fh:
        fh.write(broken + "\n")
    valid, corrupt = verify_records(out)
    assert valid == 1 and corrupt == 1
