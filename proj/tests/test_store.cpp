#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "critiq/error.hpp"
#include "critiq/store.hpp"
#include "critiq/textutil.hpp"
#include "testutil.hpp"

using namespace critiq;
using namespace critiq::testutil;

TEST_CASE("paper parsing splits on markdown and numbered headings") {
    const std::string text =
        "Preamble line before any heading.\n"
        "# Abstract\n"
        "We study things.\n"
        "## 2. Method\n"
        "Details here.\n"
        "3. Results\n"
        "Numbers here.\n";
    PaperDocument doc = parse_paper(text, "sample");
    REQUIRE(doc.sections.size() == 4);
    CHECK(doc.sections[0].label == "frontmatter");
    CHECK(doc.sections[1].label == "Abstract");
    CHECK(doc.sections[2].label == "2. Method");
    CHECK(doc.sections[3].label == "3. Results");
    CHECK(doc.title == "Abstract");
    CHECK(doc.id == "sample");
}

TEST_CASE("heading-free files become a single body section") {
    PaperDocument doc = parse_paper("just one paragraph\nwith two lines\n", "plain");
    REQUIRE(doc.sections.size() == 1);
    CHECK(doc.sections[0].label == "body");
    CHECK(doc.raw_text() == "just one paragraph\nwith two lines\n");
}

TEST_CASE("section bodies reproduce the file text minus heading lines") {
    const std::string text = case_study_paper_markdown();
    PaperDocument doc = parse_paper(text, "case");

    // oracle: strip exactly the lines the parser treats as headings
    std::string expected;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        std::string t = trim(line);
        const bool md_heading = !t.empty() && t[0] == '#';
        bool numbered = false;
        if (!t.empty() && isdigit(static_cast<unsigned char>(t[0]))) {
            size_t i = 0;
            while (i < t.size() && (isdigit(static_cast<unsigned char>(t[i])) || t[i] == '.')) ++i;
            numbered = i > 0 && i < t.size() && t[i] == ' ' && t.size() <= 100 &&
                       isupper(static_cast<unsigned char>(trim(t.substr(i))[0]));
        }
        if (!md_heading && !numbered) expected += line + "\n";
    }
    CHECK(doc.raw_text() == expected);
}

TEST_CASE("duplicate heading labels are disambiguated") {
    PaperDocument doc = parse_paper("# Setup\none\n# Setup\ntwo\n", "dupes");
    REQUIRE(doc.sections.size() == 2);
    CHECK(doc.sections[0].label == "Setup");
    CHECK(doc.sections[1].label == "Setup (2)");
}

TEST_CASE("empty and non-UTF-8 papers are rejected by name") {
    try {
        (void)parse_paper("   \n  ", "blank");
        FAIL("expected empty_document");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::empty_document);
    }
    try {
        (void)parse_paper(std::string("ok \xff\xfe bad"), "binary");
        FAIL("expected encoding_error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::encoding_error);
    }
}

TEST_CASE("load_paper surfaces io errors") {
    try {
        (void)load_paper("/nonexistent/path/to/paper.md");
        FAIL("expected io_error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::io_error);
    }
}

TEST_CASE("review corpus loads both segments") {
    TempDir dir;
    const std::string lines =
        R"({"paper_id":"p1","segment":"individual","bullets":[{"text":"b1","category":"A"}]})"
        "\n"
        R"({"paper_id":"p1","segment":"meta","bullets":[{"text":"b2","category":"B"}]})"
        "\n";
    write_text_file(dir.file("corpus.jsonl"), lines);
    auto records = load_review_corpus(dir.file("corpus.jsonl"));
    REQUIRE(records.size() == 2);
    CHECK(records[0].segment == Segment::individual);
    CHECK(records[1].segment == Segment::meta);
    CHECK(records[1].bullets[0].category == "B");
}

TEST_CASE("corpus loading fails fast with the offending line number") {
    TempDir dir;
    const std::string lines =
        R"({"paper_id":"p1","segment":"individual","bullets":[{"text":"b1"}]})"
        "\n"
        R"({"paper_id":"p1","segment":"meta","bullets":[{"text":"b2"}]})"
        "\n"
        R"({"paper_id":"p1","bullets":[{"text":"no segment"}]})"
        "\n";
    write_text_file(dir.file("corpus.jsonl"), lines);
    try {
        (void)load_review_corpus(dir.file("corpus.jsonl"));
        FAIL("expected malformed_record");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::malformed_record);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("unknown segment value is its own error") {
    TempDir dir;
    write_text_file(dir.file("corpus.jsonl"),
                    R"({"paper_id":"p","segment":"meta-review","bullets":[{"text":"b"}]})"
                    "\n");
    try {
        (void)load_review_corpus(dir.file("corpus.jsonl"));
        FAIL("expected unknown_segment");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unknown_segment);
    }
}

TEST_CASE("corpus encode/load round-trips random records") {
    std::mt19937 rng(55);
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_int_distribution<int> coin(0, 1);

    std::vector<ReviewCorpusRecord> records;
    for (int i = 0; i < 20; ++i) {
        ReviewCorpusRecord r;
        r.paper_id = "paper-" + std::to_string(i);
        r.segment = coin(rng) ? Segment::meta : Segment::individual;
        for (int b = count(rng); b > 0; --b) {
            CorpusBullet bullet;
            bullet.text = "bullet " + std::to_string(b) + " with \"quotes\" and\nnewline";
            if (coin(rng)) bullet.category = "Cat-" + std::to_string(b);
            r.bullets.push_back(std::move(bullet));
        }
        records.push_back(std::move(r));
    }

    TempDir dir;
    save_review_corpus(records, dir.file("roundtrip.jsonl"));
    auto loaded = load_review_corpus(dir.file("roundtrip.jsonl"));
    REQUIRE(loaded.size() == records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].paper_id == records[i].paper_id);
        CHECK(loaded[i].segment == records[i].segment);
        REQUIRE(loaded[i].bullets.size() == records[i].bullets.size());
        for (size_t b = 0; b < records[i].bullets.size(); ++b) {
            CHECK(loaded[i].bullets[b].text == records[i].bullets[b].text);
            CHECK(loaded[i].bullets[b].category == records[i].bullets[b].category);
        }
    }
}

TEST_CASE("impact table round-trips through its file format") {
    ImpactTable table;
    table.smoothing = 1.0;
    table.entries["Method-Validity"] = {0.4, 0.2, 2.0};
    table.entries["Writing"] = {0.1, 0.4, 0.25};

    TempDir dir;
    save_impact_table(table, dir.file("impact.json"));
    ImpactTable loaded = load_impact_table(dir.file("impact.json"));
    CHECK(loaded.smoothing == table.smoothing);
    CHECK(loaded.entries.at("Method-Validity").imp == 2.0);
    CHECK(loaded.entries.at("Writing").f_ind == 0.4);
}

TEST_CASE("replay scripts round-trip") {
    ReplayScript script = small_pipeline_script();
    script.defaults[RoleKind::reviewer] = "default-reply";
    script.embeddings["text"] = {0.1, 0.2};

    TempDir dir;
    save_replay_script(script, dir.file("replay.json"));
    ReplayScript loaded = load_replay_script(dir.file("replay.json"));
    CHECK(loaded.strict == script.strict);
    REQUIRE(loaded.entries.size() == script.entries.size());
    CHECK(loaded.entries[0].template_id == script.entries[0].template_id);
    CHECK(loaded.defaults.at(RoleKind::reviewer) == "default-reply");
    CHECK(loaded.embeddings.at("text") == std::vector<double>{0.1, 0.2});
}

TEST_CASE("run archives re-serialize byte-identically") {
    ReviewRun run;
    run.paper_id = "p1";
    run.dimension_set.paper_id = "p1";
    run.dimension_set.source_mode = DimensionMode::generated;
    run.dimension_set.dimensions = {{0, "A", "Q?", DimensionSource::generated}};
    Weakness w;
    w.id = "w00-01";
    w.text = "weakness";
    w.category = "A";
    w.dimension_index = 0;
    run.proposed = {w};
    RebuttalTranscript t;
    t.weakness_id = "w00-01";
    DebateRound round;
    round.reviewer_action = ReviewerAction::concede;
    round.assessment = {ValidLabel::fully_valid, EvidLabel::substantial, 1.0, 1.0, "ok"};
    t.rounds.push_back(round);
    t.termination = Termination::author_prevails;
    t.final_combined = 1.0;
    t.decision = Decision::retained;
    run.transcripts = {t};
    ScoredWeakness sw;
    sw.weakness = w;
    sw.weakness.state = WeaknessState::retained;
    sw.imp_norm = 0.5;
    sw.valid_score = 1.0;
    sw.evid_score = 1.0;
    sw.severity = 0.85;
    sw.rank = 1;
    run.retained = {sw};
    run.top_k = {sw};
    run.config_snapshot = {{"k", 10}};
    run.provenance.backends = {{"author", "scripted"}};
    run.provenance.timestamps = {{"started", "2026-01-01T00:00:00.000Z"}};

    TempDir dir;
    persist_run(run, dir.file("run.json"));
    const std::string bytes = read_text_file(dir.file("run.json"));

    RunArchive loaded = load_archive(dir.file("run.json"));
    CHECK(encode_run(loaded) == bytes);

    CHECK(loaded.run.paper_id == "p1");
    CHECK(loaded.run.retained[0].severity.has_value());
    CHECK(loaded.run.transcripts[0].decision == Decision::retained);
}

TEST_CASE("future schema versions are rejected") {
    TempDir dir;
    nlohmann::json j{{"schema_version", kSchemaVersion + 1}, {"kind", "run_archive"},
                     {"run", nlohmann::json::object()}};
    write_text_file(dir.file("future.json"), j.dump());
    try {
        (void)load_run(dir.file("future.json"));
        FAIL("expected schema_mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::schema_mismatch);
    }
}

TEST_CASE("kind markers are checked") {
    TempDir dir;
    nlohmann::json j{{"schema_version", kSchemaVersion}, {"kind", "impact_table"},
                     {"table", nlohmann::json::object()}};
    write_text_file(dir.file("wrong.json"), j.dump());
    CHECK_THROWS_AS((void)load_run(dir.file("wrong.json")), Error);
}

TEST_CASE("eval manifests resolve relative paths and optional fields") {
    TempDir dir;
    write_text_file(dir.file("gen.jsonl"), R"({"text":"g"})" "\n");
    write_text_file(dir.file("gold.jsonl"), R"({"text":"v"})" "\n");
    write_text_file(dir.file("invalid.jsonl"), R"({"text":"i"})" "\n");
    const std::string manifest =
        R"({"paper_id":"p1","gen":"gen.jsonl","gold_valid":"gold.jsonl","gold_invalid":"invalid.jsonl"})"
        "\n"
        R"({"paper_id":"p2","gen":"gen.jsonl","gold_valid":"gold.jsonl"})"
        "\n";
    write_text_file(dir.file("manifest.jsonl"), manifest);

    auto entries = load_eval_manifest(dir.file("manifest.jsonl"));
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].gold_invalid.has_value());
    CHECK_FALSE(entries[1].gold_invalid.has_value());
    CHECK(load_weakness_texts(entries[0].gen).texts == std::vector<std::string>{"g"});
}

TEST_CASE("property: random documents parse with unique labels and exact bodies") {
    std::mt19937 rng(777);
    std::uniform_int_distribution<int> line_count(1, 30);
    std::uniform_int_distribution<int> kind(0, 5);
    const std::vector<std::string> headings = {"# Abstract", "## Method", "# Abstract",
                                               "3. Results", "#### Deep Dive"};
    const std::vector<std::string> body_lines = {
        "plain text line", "  indented content", "1.5 not a heading (lowercase after number)",
        "#hashtag but no space", "another ordinary line", ""};

    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        const int n = line_count(rng);
        for (int i = 0; i < n; ++i) {
            if (kind(rng) == 0) {
                std::uniform_int_distribution<size_t> pick(0, headings.size() - 1);
                text += headings[pick(rng)];
            } else {
                std::uniform_int_distribution<size_t> pick(0, body_lines.size() - 1);
                text += body_lines[pick(rng)];
            }
            text += "\n";
        }
        if (trim(text).empty()) continue;

        PaperDocument doc = parse_paper(text, "fuzz");

        std::set<std::string> labels;
        for (const auto& s : doc.sections) CHECK(labels.insert(s.label).second);

        // oracle: concatenated bodies == input minus the heading lines
        std::string expected;
        std::istringstream stream(text);
        std::string line;
        while (std::getline(stream, line)) {
            std::string t = trim(line);
            bool heading = false;
            if (!t.empty() && t[0] == '#') {
                size_t i = 0;
                while (i < t.size() && t[i] == '#') ++i;
                heading = i <= 6 && i < t.size() && t[i] == ' ' && !trim(t.substr(i)).empty();
            } else if (!t.empty() && isdigit(static_cast<unsigned char>(t[0]))) {
                size_t i = 0;
                while (i < t.size() &&
                       (isdigit(static_cast<unsigned char>(t[i])) || t[i] == '.')) {
                    ++i;
                }
                heading = i < t.size() && t[i] == ' ' && t.size() <= 100 &&
                          !trim(t.substr(i)).empty() &&
                          isupper(static_cast<unsigned char>(trim(t.substr(i))[0]));
            }
            if (!heading) expected += line + "\n";
        }
        CHECK(doc.raw_text() == expected);
    }
}

TEST_CASE("property: archives re-encode byte-identically for randomized runs") {
    std::mt19937 rng(4040);
    std::uniform_int_distribution<int> count(0, 6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);

    for (int trial = 0; trial < 50; ++trial) {
        ReviewRun run;
        run.paper_id = "paper-" + std::to_string(trial);
        run.dimension_set.paper_id = run.paper_id;
        run.dimension_set.source_mode = coin(rng) ? DimensionMode::generated
                                                  : DimensionMode::union_both;
        const int dims = count(rng);
        for (int d = 0; d < dims; ++d) {
            run.dimension_set.dimensions.push_back(
                {d, "Cat-" + std::to_string(d), "Question " + std::to_string(d) + "?",
                 coin(rng) ? DimensionSource::expert : DimensionSource::generated});
        }
        const int weaknesses = count(rng);
        for (int w = 0; w < weaknesses; ++w) {
            Weakness item;
            item.id = "w" + std::to_string(w);
            item.text = "text with \"quotes\" and unicode é " + std::to_string(unit(rng));
            item.category = "Cat-" + std::to_string(w % 3);
            item.location = coin(rng) ? "Method" : "unlocated";
            item.dimension_index = w % std::max(1, dims);
            run.proposed.push_back(item);

            RebuttalTranscript t;
            t.weakness_id = item.id;
            const int rounds = 1 + (w % 3);
            for (int r = 0; r < rounds; ++r) {
                DebateRound round;
                round.reviewer_action = static_cast<ReviewerAction>(r % 3);
                round.reviewer_turn = "turn " + std::to_string(r);
                if (coin(rng)) round.revised_text = "revised " + std::to_string(r);
                round.assessment = {static_cast<ValidLabel>(r % 3), static_cast<EvidLabel>(w % 3),
                                    unit(rng), unit(rng), "j"};
                t.rounds.push_back(std::move(round));
            }
            t.termination = static_cast<Termination>(w % 3);
            t.final_combined = unit(rng);
            t.decision = t.final_combined >= 0.4 ? Decision::retained : Decision::filtered;
            run.transcripts.push_back(std::move(t));

            if (run.transcripts.back().decision == Decision::retained) {
                ScoredWeakness sw;
                sw.weakness = item;
                sw.weakness.state = WeaknessState::retained;
                sw.imp_norm = unit(rng);
                sw.valid_score = unit(rng);
                sw.evid_score = unit(rng);
                if (coin(rng)) sw.severity = unit(rng);
                sw.rank = static_cast<int>(run.retained.size()) + 1;
                run.retained.push_back(sw);
                run.top_k.push_back(sw);
            }
        }
        run.config_snapshot = {{"k", 10}, {"epsilon", 0.4}};
        run.provenance.backends = {{"author", "scripted"}};
        run.provenance.timestamps = {{"started", "2026-02-03T04:05:06.007Z"}};

        TempDir dir;
        persist_run(run, dir.file("run.json"));
        const std::string bytes = read_text_file(dir.file("run.json"));
        RunArchive loaded = load_archive(dir.file("run.json"));
        CHECK(encode_run(loaded) == bytes);

        // and a second decode of the re-encoding still matches
        write_text_file(dir.file("again.json"), encode_run(loaded));
        RunArchive reloaded = load_archive(dir.file("again.json"));
        CHECK(encode_run(reloaded) == bytes);
    }
}

TEST_CASE("weakness sets load from plain lists and from archives") {
    TempDir dir;
    write_text_file(dir.file("list.jsonl"), "{\"text\":\"a\"}\n{\"text\":\"b\"}\n");
    WeaknessSet set = load_weakness_texts(dir.file("list.jsonl"));
    CHECK(set.texts == std::vector<std::string>{"a", "b"});
    CHECK(set.severities.empty());

    ReviewRun run;
    run.paper_id = "p";
    ScoredWeakness sw;
    sw.weakness.id = "w00-01";
    sw.weakness.text = "ranked weakness";
    sw.severity = 0.9;
    sw.rank = 1;
    run.retained = {sw};
    persist_run(run, dir.file("archive.json"));
    WeaknessSet from_archive = load_weakness_texts(dir.file("archive.json"));
    CHECK(from_archive.texts == std::vector<std::string>{"ranked weakness"});
    CHECK(from_archive.severities == std::vector<double>{0.9});
}
