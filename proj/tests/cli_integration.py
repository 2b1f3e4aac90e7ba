#!/usr/bin/env python3
"""End-to-end checks of facetag-cli: exit codes, determinism, output schemas."""

import json
import os
import shutil
import subprocess
import sys
import tempfile

import jsonschema

CLI, ADAPTER, SOURCE = sys.argv[1:4]
DATA = os.path.join(SOURCE, "tests", "data")
SCHEMAS = os.path.join(SOURCE, "schemas")
failures = []


def run(*args, expect=0):
    p = subprocess.run([CLI, "--no-timestamp", *args], capture_output=True, text=True)
    if p.returncode != expect:
        failures.append(f"{' '.join(args[:1])}: exit {p.returncode}, wanted {expect}\n{p.stderr}")
    return p


def check(cond, what):
    if not cond:
        failures.append(what)


def validated(command, stdout):
    doc = json.loads(stdout)
    with open(os.path.join(SCHEMAS, command + ".json")) as f:
        schema = json.load(f)
    try:
        jsonschema.Draft202012Validator(schema).validate(doc)
    except jsonschema.ValidationError as e:
        failures.append(f"{command}: schema: {e.message} at {list(e.absolute_path)}")
    return doc["result"]


def main():
    tmp = tempfile.mkdtemp(prefix="facetag-cli-")
    t = lambda name: os.path.join(tmp, name)
    os.chdir(DATA)

    r = validated("import", run("import", "-i", "tiny_corpus.jsonl", "-o", t("c.jsonl"),
                                "--tagset-registry", "tagsets.json", "--tagset-id", "mrda-basic").stdout)
    check(r["summary"]["utterances"] == 60, "import: utterance count")
    check(r["dedupe"]["removed"] == 1, "import: dedupe removal")
    check(sum(r["summary"]["histogram"].values()) == r["summary"]["labeled_utterances"], "import: histogram sum")

    r = validated("import", run("--config", "tiny_tsv_config.json", "import", "-i", "tiny.tsv").stdout)
    check(r["summary"]["utterances"] == 12, "import tsv: utterance count")

    validated("prepare", run("prepare", "--corpus", t("c.jsonl"), "-o", t("fos.jsonl")).stdout)
    validated("prepare", run("prepare", "--corpus", t("c.jsonl"), "-o", t("ta.jsonl"), "--variant", "ta").stdout)
    p = run("prepare", "--corpus", "tiny_plain.jsonl", "-o", t("x.jsonl"), "--variant", "ta", expect=1)
    check("t00:0" in p.stderr, "prepare ta: error names the first utterance: " + p.stderr)
    p = run("import", "-i", t("missing.jsonl"), expect=2)
    check("missing.jsonl" in p.stderr, "missing file named")
    p = run("--config", t("missing.json"), "import", "-i", "tiny_corpus.jsonl", expect=2)
    with open(t("bad.json"), "w") as f:
        f.write('{"contxt_size": 3}')
    p = run("--config", t("bad.json"), "import", "-i", "tiny_corpus.jsonl", expect=1)
    check("contxt_size" in p.stderr, "bad config field named")
    run("bogus-command", expect=1)

    validated("predict", run("predict", "--examples", t("fos.jsonl"), "-o", t("p_fos.jsonl")).stdout)
    validated("predict", run("--jobs", "3", "predict", "--examples", t("fos.jsonl"), "-o", t("p_fos3.jsonl")).stdout)
    check(open(t("p_fos.jsonl"), "rb").read() == open(t("p_fos3.jsonl"), "rb").read(), "predict: jobs change output")
    validated("predict", run("predict", "--examples", t("ta.jsonl"), "-o", t("p_ta.jsonl")).stdout)
    validated("train-baseline", run("train-baseline", "--examples", t("fos.jsonl"), "-o", t("m.json"),
                                    "--holdout-fold", "0").stdout)
    validated("predict", run("predict", "--examples", t("fos.jsonl"), "--model", t("m.json"),
                             "-o", t("p_model.jsonl")).stdout)
    with open(t("endpoint.json"), "w") as f:
        json.dump({"command": [ADAPTER, "echo"], "timeout_ms": 20000}, f)
    r = validated("predict", run("predict", "--examples", t("fos.jsonl"), "--predictor", "external",
                                 "--endpoint", t("endpoint.json"), "-o", t("p_ext.jsonl")).stdout)
    check(r["predictions"] == 60 and r["mode"] == "external", "predict external: count")
    with open(t("endpoint_omit.json"), "w") as f:
        json.dump({"command": [ADAPTER, "omit"]}, f)
    p = run("predict", "--examples", t("fos.jsonl"), "--predictor", "external",
            "--endpoint", t("endpoint_omit.json"), "-o", t("p_bad.jsonl"), expect=2)
    check("MissingResponse" in p.stderr, "predict external: missing response reported")

    first = run("evaluate", "--pred", t("p_fos.jsonl"), "--gold", t("c.jsonl"), "-o", t("e_fos.json"))
    second = run("evaluate", "--pred", t("p_fos.jsonl"), "--gold", t("c.jsonl"))
    check(open(t("e_fos.json")).read() == second.stdout, "evaluate: reruns differ")
    validated("evaluate", second.stdout)
    run("evaluate", "--pred", t("p_ta.jsonl"), "--gold", t("c.jsonl"), "-o", t("e_ta.json"))
    stamped = subprocess.run([CLI, "evaluate", "--pred", t("p_fos.jsonl"), "--gold", t("c.jsonl")],
                             capture_output=True, text=True)
    check("generated_at" in json.loads(stamped.stdout), "evaluate: timestamp present by default")

    for level in ("label", "aggregate", "across-labels"):
        r = validated("compare", run("compare", "--reports", t("e_fos.json"), t("e_ta.json"),
                                     "--names", "fos", "ta", "--level", level).stdout)
        check(len(r["rows"]) >= 1, "compare: rows for " + level)
    r = validated("compare", run("compare", "--reports", t("e_fos.json"), t("e_fos.json"),
                                 "--names", "a", "b", "--level", "aggregate", "--exact").stdout)
    check(r["rows"][0]["friedman"]["p"] == 1.0, "compare: identical systems give p = 1")

    validated("correlate", run("correlate", "--corpus", t("c.jsonl")).stdout)
    validated("correlate", run("correlate", "--report", t("e_fos.json")).stdout)
    r = validated("confusion", run("confusion", "--pred", t("p_fos.jsonl"), "--gold", t("c.jsonl"),
                                   "--normalized").stdout)
    check(r["total"] == 60, "confusion: total")

    r = validated("sample-errors", run("sample-errors", "--pred", t("p_fos.jsonl"), "--examples",
                                       t("fos.jsonl"), "-o", t("sheet.tsv")).stdout)
    again = run("sample-errors", "--pred", t("p_fos.jsonl"), "--examples", t("fos.jsonl"), "-o", t("sheet2.tsv"))
    check(open(t("sheet.tsv"), "rb").read() == open(t("sheet2.tsv"), "rb").read(), "sample-errors: sheets differ")
    lines = open(t("sheet.tsv")).read().splitlines()
    check(len(lines) == r["samples"] + 1, "sample-errors: row count")
    p = run("tally-errors", "--sheet", t("sheet.tsv"), expect=1)
    check("row 1" in p.stderr, "tally-errors: blank category names the row")
    cats = ["Predicted Other", "NoIdea", "gold error (correct)", "TrueForPrevious"]
    with open(t("filled.tsv"), "w") as f:
        f.write(lines[0] + "\n")
        for i, line in enumerate(lines[1:]):
            f.write("\t".join(line.split("\t")[:-1] + [cats[i % 4]]) + "\n")
    r = validated("tally-errors", run("tally-errors", "--sheet", t("filled.tsv")).stdout)
    check(r["total"] == len(lines) - 1, "tally-errors: total")
    check(r["column_totals"]["PredictedOther"] == (len(lines) - 1 + 3) // 4, "tally-errors: column total")

    r = validated("shift", run("shift", "--pred-a", t("p_fos.jsonl"), "--pred-b", t("p_ta.jsonl"),
                               "--gold", t("c.jsonl"), "--target", "hneg+").stdout)
    check(r["unchanged"] + sum(c["count"] for c in r["cells"]) == r["total"], "shift: partition")
    check("Disruption" not in r["overall"]["tags"], "shift: Disruption collapsed")

    for f in failures:
        print("FAIL:", f)
    print(f"cli integration: {len(failures)} failure(s)")
    shutil.rmtree(tmp, ignore_errors=True)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
