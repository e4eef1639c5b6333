#include <doctest.h>

#include "critiq/domain.hpp"
#include "critiq/error.hpp"

using namespace critiq;

TEST_CASE("label_to_score canonical mapping") {
    CHECK(label_to_score(ValidLabel::fully_valid) == 1.0);
    CHECK(label_to_score(ValidLabel::partially_valid) == 0.5);
    CHECK(label_to_score(ValidLabel::invalid) == 0.0);
    CHECK(label_to_score(EvidLabel::substantial) == 1.0);
    CHECK(label_to_score(EvidLabel::moderate) == 0.5);
    CHECK(label_to_score(EvidLabel::weak_absent) == 0.0);
}

TEST_CASE("label_to_score is monotone over both enums") {
    CHECK(label_to_score(ValidLabel::fully_valid) > label_to_score(ValidLabel::partially_valid));
    CHECK(label_to_score(ValidLabel::partially_valid) > label_to_score(ValidLabel::invalid));
    CHECK(label_to_score(EvidLabel::substantial) > label_to_score(EvidLabel::moderate));
    CHECK(label_to_score(EvidLabel::moderate) > label_to_score(EvidLabel::weak_absent));
}

TEST_CASE("combined_support") {
    ValidityAssessment a;

    a.valid_score = 1.0;
    a.evid_score = 1.0;
    CHECK(combined_support(a) == 1.0);

    a.valid_score = 0.5;
    a.evid_score = 0.5;
    CHECK(combined_support(a) == doctest::Approx(0.5).epsilon(1e-12));

    // The sub-threshold combination reachable with continuous backend scores.
    a.valid_score = 0.34;
    a.evid_score = 0.30;
    CHECK(combined_support(a) == doctest::Approx(0.32).epsilon(1e-12));
}

TEST_CASE("combined_support is symmetric and monotone") {
    for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        for (double y : {0.0, 0.3, 0.6, 1.0}) {
            ValidityAssessment ab;
            ab.valid_score = x;
            ab.evid_score = y;
            ValidityAssessment ba;
            ba.valid_score = y;
            ba.evid_score = x;
            CHECK(combined_support(ab) == doctest::Approx(combined_support(ba)).epsilon(1e-15));

            ValidityAssessment bumped = ab;
            bumped.valid_score = std::min(1.0, x + 0.1);
            CHECK(combined_support(bumped) >= combined_support(ab));
            bumped = ab;
            bumped.evid_score = std::min(1.0, y + 0.1);
            CHECK(combined_support(bumped) >= combined_support(ab));
        }
    }
}

TEST_CASE("weighted combined_support") {
    ValidityAssessment a;
    a.valid_score = 1.0;
    a.evid_score = 0.0;
    CHECK(combined_support(a, 0.7) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(combined_support(a, 0.0) == 0.0);
}

TEST_CASE("paper raw_text is the section body concatenation") {
    PaperDocument doc;
    doc.id = "p";
    doc.sections = {{"a", "one "}, {"b", "two "}, {"c", "three"}};
    CHECK(doc.raw_text() == "one two three");
    CHECK(doc.has_section("b"));
    CHECK_FALSE(doc.has_section("d"));
}

TEST_CASE("enum round trips through names") {
    CHECK(valid_label_from(to_string(ValidLabel::partially_valid)) == ValidLabel::partially_valid);
    CHECK(evid_label_from(to_string(EvidLabel::weak_absent)) == EvidLabel::weak_absent);
    CHECK(termination_from(to_string(Termination::agreed_partial)) == Termination::agreed_partial);
    CHECK(decision_from(to_string(Decision::retained)) == Decision::retained);
    CHECK(segment_from(to_string(Segment::meta)) == Segment::meta);
    CHECK_THROWS_AS((void)segment_from("meta-review"), Error);
}
