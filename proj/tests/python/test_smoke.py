"""Smoke tests for the python bindings."""

import json
import math

import pytest

import critiq


def test_label_scores():
    assert critiq.label_to_score("fully_valid") == 1.0
    assert critiq.label_to_score("partially_valid") == 0.5
    assert critiq.label_to_score("weak_absent") == 0.0


def test_combined_support():
    assert critiq.combined_support(0.34, 0.30) == pytest.approx(0.32, abs=1e-12)
    assert critiq.combined_support(1.0, 0.0, valid_weight=0.7) == pytest.approx(0.7)


def test_expert_dimensions():
    dims = critiq.expert_dimensions()
    assert len(dims) == 20
    questions = {d["question"] for d in dims}
    assert "Any unclear or confusing part in the approach description?" in questions
    assert len({d["category"] for d in dims}) == 16


def test_severity():
    assert critiq.severity(0.8, 0.5, 0.5) == pytest.approx(0.65, abs=1e-12)
    assert critiq.severity(1.0, 1.0, 1.0, alpha=0.5, beta=0.3) == pytest.approx(1.0)


def test_f1_inv_reproduces_published_values():
    assert critiq.f1_inv(0.2952, 0.3566, 0.3296, report_scale=True) == pytest.approx(
        25.10, abs=0.10
    )
    assert critiq.f1_inv(0.3765, 0.4399, 0.3932, report_scale=True) == pytest.approx(
        21.77, abs=0.10
    )
    with pytest.raises(RuntimeError):
        critiq.f1_inv(0.5, 0.0, 1.0)


def test_impact_fit_and_ranking():
    records = [
        {
            "paper_id": "p",
            "segment": "meta",
            "bullets": [{"text": "b", "category": c} for c in ["A"] * 4 + ["B"] * 6],
        },
        {
            "paper_id": "p",
            "segment": "individual",
            "bullets": [{"text": "b", "category": c} for c in ["A"] * 2 + ["B"] * 8],
        },
    ]
    table = critiq.fit_impact_table(records, smoothing=0.0)
    assert table["entries"]["A"]["imp"] == pytest.approx(2.0, abs=1e-12)

    normalized = critiq.normalize_impact(table)
    assert normalized["A"] == pytest.approx(1.0)

    ranked = critiq.rank_top_k(
        [
            {"id": "w1", "category": "A", "valid_score": 0.5, "evid_score": 0.5},
            {"id": "w2", "category": "B", "valid_score": 0.5, "evid_score": 0.5},
        ],
        table,
        k=1,
    )
    assert len(ranked) == 1
    assert ranked[0]["weakness"]["id"] == "w1"
    assert ranked[0]["rank"] == 1


def test_matching_and_similarity():
    assert critiq.tfidf_similarity("same text", "same text") == 1.0
    report = critiq.match_and_score(["missing variance"], ["missing variance"])
    assert report["f1"] == 1.0
    report = critiq.match_and_score(["alpha beta"], ["gamma delta"])
    assert report["f1"] == 0.0


def test_specificity_and_pearson():
    spec = critiq.specificity(
        {"p1": ["alpha beta"], "p2": ["alpha gamma"], "p3": ["alpha delta"]}
    )
    assert spec["p1"] == pytest.approx(spec["p2"], abs=1e-12)
    assert critiq.pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert critiq.pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


def test_retention_rate():
    assert critiq.retention_rate(36, 14) == pytest.approx(14 / 36, abs=1e-12)


def test_end_to_end_scripted_run(tmp_path):
    paper = tmp_path / "paper.md"
    paper.write_text(
        "# Tiny Paper\n\nabstract text\n\n## Method\nmethod text\n\n## Results\nresult text\n"
    )

    def fence(payload):
        return "```json\n" + json.dumps(payload) + "\n```"

    script = {
        "schema_version": 1,
        "kind": "replay_script",
        "strict": True,
        "entries": [
            {
                "role": "customizer",
                "template": "customizer_dims",
                "response": fence(
                    [{"category": "Method-Validity", "question": "Is the method sound?"}]
                ),
            },
            {
                "role": "reviewer",
                "dimension_index": 0,
                "template": "reviewer_propose",
                "response": fence(
                    [
                        {"text": "No error bars reported.", "location": "Results"},
                        {"text": "Method section skips the loss.", "location": "Method"},
                    ]
                ),
            },
            {
                "role": "author",
                "template": "author_assess",
                "match": {"weakness_id": "w00-01"},
                "response": fence(
                    {"valid": "fully_valid", "evid": "substantial", "justification": "yes"}
                ),
            },
            {
                "role": "reviewer",
                "template": "reviewer_react",
                "match": {"weakness_id": "w00-01"},
                "response": fence({"action": "concede", "argument": "fair"}),
            },
            {
                "role": "author",
                "template": "author_assess",
                "match": {"weakness_id": "w00-02"},
                "response": fence({"valid": "invalid", "evid": "weak_absent"}),
            },
            {
                "role": "reviewer",
                "template": "reviewer_react",
                "match": {"weakness_id": "w00-02"},
                "response": fence({"action": "counter", "argument": "it matters"}),
            },
        ],
    }
    script_path = tmp_path / "replay.json"
    script_path.write_text(json.dumps(script))

    archive = critiq.run_review(str(paper), str(script_path), {"k": 5})
    run = archive["run"]
    assert len(run["proposed"]) == 2
    assert len(run["retained"]) == 1
    assert run["retained"][0]["weakness"]["id"] == "w00-01"
    assert run["retained"][0]["severity"] is not None
    assert archive["schema_version"] == 1

    # deterministic: a second run differs only in timestamps
    again = critiq.run_review(str(paper), str(script_path), {"k": 5})
    archive["run"]["provenance"].pop("timestamps")
    again["run"]["provenance"].pop("timestamps")
    assert archive == again


def test_render_template():
    text = critiq.render_template(
        "category_classify", {"bullet_text": "b", "categories": "A; B"}
    )
    assert "{bullet_text}" not in text
    assert "b" in text


def test_load_paper(tmp_path):
    p = tmp_path / "doc.md"
    p.write_text("# Title\n\nbody text\n## Second\nmore\n")
    doc = critiq.load_paper(str(p))
    labels = [s["label"] for s in doc["sections"]]
    assert labels == ["Title", "Second"]
    with pytest.raises(RuntimeError):
        critiq.load_paper(str(tmp_path / "missing.md"))
