#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "wga/core/records.hpp"

using namespace wga::core;

namespace {

SftRecord make_valid_record() {
    SftRecord r;
    r.prompt = {"p-1", "Pixel the Fox mascot", Language::en, "Mascot"};
    r.textual.query = "pixel the fox mascot";
    r.textual.evidence = {{"Wiki", "https://example.org/wiki", "An orange fox mascot."}};
    r.visual.query = "pixel the fox official art";
    r.visual.candidates = {{0, "https://img/a", 7.0, false, ""},
                           {1, "https://img/b", 9.0, false, ""},
                           {2, "https://img/c", 8.0, false, ""}};
    r.visual.selected = {1, 2};
    r.recaption.think = "fuse both references";
    r.recaption.body = "An orange fox, details from image_1 and image_2.";
    r.recaption.references_used = {"image_1", "image_2"};
    r.recaption.language = Language::en;
    r.image_ref = "deadbeefdeadbeef";
    r.verified = true;
    r.trials_used = 2;
    return r;
}

// Independent selection oracle: full sort by (-aggregate, id), first two.
std::vector<int> selection_oracle(const std::vector<CandidateScore>& cands) {
    std::vector<CandidateScore> surv;
    for (const auto& c : cands)
        if (!c.rejected) surv.push_back(c);
    std::sort(surv.begin(), surv.end(), [](const auto& a, const auto& b) {
        if (a.aggregate != b.aggregate) return a.aggregate > b.aggregate;
        return a.id < b.id;
    });
    std::vector<int> out;
    for (size_t i = 0; i < surv.size() && i < 2; ++i) out.push_back(surv[i].id);
    return out;
}

}  // namespace

TEST_CASE("record serialization round-trips one record", "[records]") {
    auto rec = make_valid_record();
    std::stringstream buf;
    REQUIRE(write_records({rec}, buf) == 1);
    auto back = read_records(buf);
    REQUIRE(back.size() == 1);
    CHECK(back[0] == rec);
}

TEST_CASE("empty stream yields empty record list", "[records]") {
    std::stringstream buf;
    CHECK(read_records(buf).empty());
}

TEST_CASE("truncated line reports its line number", "[records]") {
    auto rec = make_valid_record();
    std::stringstream buf;
    write_records({rec, rec}, buf);
    std::string text = buf.str();
    size_t first_nl = text.find('\n');
    std::string broken = text.substr(0, first_nl + 1) + text.substr(first_nl + 1, 40) + "\n";
    std::stringstream in(broken);
    try {
        read_records(in);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("top-level key layout is fixed", "[records]") {
    auto j = to_json(make_valid_record());
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"prompt", "textual", "visual", "recaption", "image_ref",
                                           "verified", "trials_used"});
}

TEST_CASE("validate_record flags missing image_ref on verified records", "[records]") {
    auto rec = make_valid_record();
    rec.image_ref.reset();
    auto v = validate_record(rec);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "image_ref");
}

TEST_CASE("validate_record enforces the five-trial cap", "[records]") {
    auto rec = make_valid_record();
    rec.trials_used = 6;
    auto v = validate_record(rec);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "trials_used");
    CHECK(v[0].rule.find("5") != std::string::npos);
}

TEST_CASE("validate_record accepts a consistent record", "[records]") {
    CHECK(validate_record(make_valid_record()).empty());
}

TEST_CASE("validate_record rejects selections violating the ranking rule", "[records]") {
    auto rec = make_valid_record();
    rec.visual.selected = {0, 2};  // true top-2 is {1, 2}
    auto v = validate_record(rec);
    REQUIRE_FALSE(v.empty());
    CHECK(v[0].field == "visual.selected");
}

TEST_CASE("validate_record rejects unknown reference tokens and language drift", "[records]") {
    auto rec = make_valid_record();
    rec.recaption.references_used.insert("image_3");
    rec.recaption.language = Language::zh;
    auto v = validate_record(rec);
    REQUIRE(v.size() == 2);
}

TEST_CASE("serialization round-trip is identity over generated records", "[records][property]") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> score(1, 10);
    std::uniform_int_distribution<int> ncand(0, 6);
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<SftRecord> records;
    for (int k = 0; k < 60; ++k) {
        SftRecord r;
        r.prompt = {"id-" + std::to_string(k), "prompt " + std::to_string(k),
                    coin(rng) ? Language::zh : Language::en, std::nullopt};
        r.textual.query = "q" + std::to_string(k);
        int n = ncand(rng);
        for (int i = 0; i < n; ++i)
            r.visual.candidates.push_back(
                {i, "u" + std::to_string(i), static_cast<double>(score(rng)), coin(rng) == 0, ""});
        r.visual.query = n ? "vq" : "";
        r.visual.selected = selection_oracle(r.visual.candidates);
        r.recaption.body = "body " + std::to_string(k) + " image_1";
        r.recaption.references_used = {"image_1"};
        r.recaption.language = r.prompt.language;
        r.trials_used = 1 + (k % 5);
        if (coin(rng)) {
            r.verified = true;
            r.image_ref = "hash" + std::to_string(k);
        }
        records.push_back(r);
    }
    std::stringstream buf;
    write_records(records, buf);
    auto back = read_records(buf);
    REQUIRE(back.size() == records.size());
    for (size_t i = 0; i < records.size(); ++i) CHECK(back[i] == records[i]);
}

TEST_CASE("validate_record is deterministic", "[records]") {
    auto rec = make_valid_record();
    rec.prompt.text.clear();
    rec.recaption.body.clear();
    auto a = validate_record(rec);
    auto b = validate_record(rec);
    CHECK(a == b);
    REQUIRE(a.size() == 2);
}
