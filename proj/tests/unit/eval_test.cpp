#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <doctest.h>

#include "scvd/errors.hpp"
#include "scvd/eval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

namespace fs = std::filesystem;
using namespace scvd;

namespace {

const fs::path kFixtures = fs::path(SCVD_FIXTURES_DIR);

DatasetManifest synthetic_pool(VulnCategory c, std::size_t positives, std::size_t negatives) {
    DatasetManifest m;
    for (std::size_t i = 0; i < positives + negatives; ++i) {
        Instance inst;
        inst.id = (i < positives ? "p-" : "n-") + std::to_string(i);
        inst.category = c;
        inst.positive = i < positives;
        m.instances.push_back(inst);
    }
    return m;
}

std::set<std::string> ids(const EvalSet& s) {
    std::set<std::string> out;
    for (const auto& i : s.instances()) out.insert(i.id);
    return out;
}

Instance conformance(const std::string& id, const std::string& contract, const std::string& fn, bool positive) {
    Instance inst;
    inst.id = id;
    inst.project_path = kFixtures / "conformance";
    inst.contract = contract;
    inst.function = fn;
    inst.category = VulnCategory::Reentrancy;
    inst.positive = positive;
    return inst;
}

}  // namespace

TEST_CASE("load_manifest") {
    SUBCASE("ten lines") {
        const auto m = load_manifest(kFixtures / "manifests" / "ten.jsonl");
        REQUIRE(m.instances.size() == 10);
        CHECK(m.instances[0].id == "me-01");
        CHECK(m.instances[0].category == VulnCategory::MissingEvent);
        CHECK(m.instances[0].positive);
        CHECK(fs::equivalent(m.instances[0].project_path, kFixtures / "synthetic" / "project"));
    }
    SUBCASE("duplicate id names the line") {
        try {
            load_manifest(kFixtures / "manifests" / "duplicate.jsonl");
            FAIL("expected ManifestInvalid");
        } catch (const ManifestInvalid& e) {
            REQUIRE(e.violations().size() == 1);
            CHECK(e.violations()[0].rfind("line 7: duplicate id 'me-03'", 0) == 0);
        }
    }
    SUBCASE("empty file") { CHECK(load_manifest(kFixtures / "manifests" / "empty.jsonl").instances.empty()); }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_manifest(kFixtures / "manifests" / "nope.jsonl"), IoError); }
    SUBCASE("every bad line is reported") {
        const std::string text =
            "{\"id\": \"a\", \"project\": \"p\", \"contract\": \"C\", \"function\": \"f\", \"category\": \"reentrancy\", "
            "\"label\": \"positive\"}\n"
            "\n"
            "{\"id\": \"b\", \"project\": \"p\", \"contract\": \"C\", \"function\": \"f\", \"category\": \"gas\", "
            "\"label\": \"positive\"}\n"
            "{\"id\": \"c\", \"project\": \"p\", \"contract\": \"C\", \"function\": \"f\", \"category\": \"reentrancy\", "
            "\"label\": \"maybe\"}\n"
            "{\"id\": \"d\"}\n"
            "not json\n";
        try {
            parse_manifest(text, ".");
            FAIL("expected ManifestInvalid");
        } catch (const ManifestInvalid& e) {
            const std::string what = e.what();
            CHECK(what.find("line 3: unknown category 'gas'") != std::string::npos);
            CHECK(what.find("line 4: unknown label 'maybe'") != std::string::npos);
            CHECK(what.find("line 5: missing 'project'") != std::string::npos);
            CHECK(what.find("line 6: not a JSON object") != std::string::npos);
        }
    }
}

TEST_CASE("sample_instances") {
    SUBCASE("large reentrancy pool") {
        const auto m = synthetic_pool(VulnCategory::Reentrancy, 375, 2000);
        const auto s = sample_instances(m, VulnCategory::Reentrancy, 42, 2.0);
        CHECK(s.positives.size() == 375);
        CHECK(s.negatives.size() == 750);
        CHECK(s.warnings.empty());
    }
    SUBCASE("short negative pool") {
        const auto m = synthetic_pool(VulnCategory::Reentrancy, 5, 5);
        const auto s = sample_instances(m, VulnCategory::Reentrancy, 1, 2.0);
        CHECK(s.positives.size() == 5);
        CHECK(s.negatives.size() == 5);
        REQUIRE(s.warnings.size() == 1);
        CHECK(s.warnings[0].find("negative pool has 5") != std::string::npos);
    }
    SUBCASE("determinism and seed sensitivity") {
        const auto m = synthetic_pool(VulnCategory::Reentrancy, 20, 200);
        CHECK(ids(sample_instances(m, VulnCategory::Reentrancy, 7, 1.5)) ==
              ids(sample_instances(m, VulnCategory::Reentrancy, 7, 1.5)));
        CHECK(ids(sample_instances(m, VulnCategory::Reentrancy, 7, 1.5)) !=
              ids(sample_instances(m, VulnCategory::Reentrancy, 8, 1.5)));
    }
    SUBCASE("manifest order does not matter") {
        auto m = synthetic_pool(VulnCategory::Reentrancy, 20, 200);
        const auto before = ids(sample_instances(m, VulnCategory::Reentrancy, 3, 2.0, 10));
        std::shuffle(m.instances.begin(), m.instances.end(), std::mt19937_64(99));
        CHECK(ids(sample_instances(m, VulnCategory::Reentrancy, 3, 2.0, 10)) == before);
    }
    SUBCASE("caps, rounding, other categories") {
        auto m = synthetic_pool(VulnCategory::Reentrancy, 20, 200);
        auto other = synthetic_pool(VulnCategory::MissingEvent, 3, 3);
        for (auto& i : other.instances) i.id = "me-" + i.id;
        m.instances.insert(m.instances.end(), other.instances.begin(), other.instances.end());
        const auto s = sample_instances(m, VulnCategory::Reentrancy, 3, 1.5, 7);
        CHECK(s.positives.size() == 7);
        CHECK(s.negatives.size() == 11);  // round(10.5)
        for (const auto& i : s.instances()) CHECK(i.category == VulnCategory::Reentrancy);
        CHECK(std::is_sorted(s.negatives.begin(), s.negatives.end(),
                             [](const Instance& a, const Instance& b) { return a.id < b.id; }));
    }
    SUBCASE("errors") {
        const auto m = synthetic_pool(VulnCategory::Reentrancy, 3, 3);
        CHECK_THROWS_AS(sample_instances(m, VulnCategory::MissingEvent, 1, 1.0), NoPositives);
        CHECK_THROWS_AS(sample_instances(m, VulnCategory::Reentrancy, 1, 0.5), OutOfRange);
        CHECK_THROWS_AS(sample_instances(m, VulnCategory::Reentrancy, 1, 2.5), OutOfRange);
    }
    SUBCASE("uniform_below stays in range") {
        std::mt19937_64 rng(5);
        std::vector<int> hist(3);
        for (int i = 0; i < 3000; ++i) {
            const auto x = uniform_below(rng, 3);
            REQUIRE(x < 3);
            ++hist[x];
        }
        for (int h : hist) CHECK(h > 850);
        CHECK(uniform_below(rng, 1) == 0);
        CHECK(uniform_below(rng, 0) == 0);
    }
}

TEST_CASE("run_eval") {
    PipelineConfig cfg;
    SUBCASE("four instances the rules engine gets right") {
        EvalSet set;
        set.positives = {conformance("a", "R01", "withdraw", true), conformance("b", "R06", "pay", true)};
        set.negatives = {conformance("c", "R02", "withdraw", false), conformance("d", "R04", "withdraw", false)};
        const auto r = run_eval(set, cfg);
        CHECK(r.matrix == ConfusionMatrix{2, 0, 2, 0});
        CHECK(r.errors == 0);
        CHECK(r.records.size() == 4);
    }
    SUBCASE("an unparseable project is recorded, not counted") {
        const auto broken = fs::temp_directory_path() / ("scvd-broken-" + std::to_string(std::random_device{}()));
        fs::create_directories(broken);
        std::ofstream(broken / "Broken.sol") << "contract Broken { function f( }";
        EvalSet set;
        set.positives = {conformance("a", "R01", "withdraw", true)};
        set.negatives = {conformance("c", "R02", "withdraw", false), conformance("d", "R04", "withdraw", false)};
        auto bad = conformance("b", "Broken", "f", true);
        bad.project_path = broken;
        set.positives.push_back(bad);
        const auto r = run_eval(set, cfg);
        fs::remove_all(broken);
        CHECK(r.errors == 1);
        CHECK(r.matrix == ConfusionMatrix{1, 0, 2, 0});
        const auto& rec = r.records[1];
        CHECK(rec.id == "b");
        CHECK_FALSE(rec.verdict.has_value());
        CHECK_FALSE(rec.stage.empty());
        CHECK(r.matrix.total() + r.errors == set.size());
    }
    SUBCASE("missing function and unsupported category are errors") {
        EvalSet set;
        set.positives = {conformance("a", "R01", "nope", true)};
        auto c = conformance("b", "R01", "withdraw", false);
        c.category = VulnCategory::Centralization;
        set.negatives = {c};
        const auto r = run_eval(set, cfg);
        CHECK(r.errors == 2);
        CHECK(r.records[0].stage == "locate");
        CHECK(r.records[1].stage == "detect");
    }
    SUBCASE("empty set") {
        const auto r = run_eval(EvalSet{}, cfg);
        CHECK(r.records.empty());
        CHECK(r.matrix == ConfusionMatrix{});
    }
}

TEST_CASE("run_eval with the llm backend runs requests concurrently") {
    httplib::Server server;
    std::atomic<int> in_flight{0}, peak{0}, hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        const int now = ++in_flight;
        int p = peak.load();
        while (now > p && !peak.compare_exchange_weak(p, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        ++hits;
        --in_flight;
        res.set_content(R"({"choices": [{"message": {"content": "{\"is_vulnerable\": true}"}}]})", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    const auto store = load_example_store(default_prompts_dir());
    PipelineConfig cfg;
    cfg.backend.kind = BackendKind::Llm;
    cfg.backend.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.backend.api_key = "k";
    cfg.store = &store;
    cfg.concurrency = 4;
    EvalSet set;
    for (int i = 0; i < 8; ++i)
        (i % 2 ? set.negatives : set.positives)
            .push_back(conformance("i" + std::to_string(i), "R01", "withdraw", i % 2 == 0));
    const auto r = run_eval(set, cfg);
    server.stop();
    t.join();

    CHECK(hits == 8);
    CHECK(peak <= 4);
    CHECK(peak >= 2);
    CHECK(r.matrix == ConfusionMatrix{4, 0, 0, 4});
    CHECK(std::is_sorted(r.records.begin(), r.records.end(),
                         [](const InstanceRecord& a, const InstanceRecord& b) { return a.id < b.id; }));
    for (const auto& rec : r.records) CHECK(rec.verdict->backend == "llm");
}

TEST_CASE("compute_metrics") {
    auto near = [](const std::optional<double>& v, double x) { return v && std::abs(*v - x) < 1e-4; };
    const auto perfect = compute_metrics({10, 0, 10, 0});
    CHECK(near(perfect.positive_recall, 1.0));
    CHECK(near(perfect.negative_recall, 1.0));
    CHECK(near(perfect.precision, 1.0));
    CHECK(near(perfect.accuracy, 1.0));

    const auto m = compute_metrics({76, 24, 85, 15});
    CHECK(near(m.positive_recall, 0.76));
    CHECK(near(m.negative_recall, 0.85));
    CHECK(near(m.precision, 0.8352));
    CHECK(near(m.accuracy, 0.805));

    const auto degenerate = compute_metrics({0, 0, 5, 0});
    CHECK_FALSE(degenerate.positive_recall.has_value());
    CHECK_FALSE(degenerate.precision.has_value());
    CHECK(near(degenerate.negative_recall, 1.0));
    CHECK(near(degenerate.accuracy, 1.0));

    const auto none = compute_metrics({});
    CHECK_FALSE(none.accuracy.has_value());
}

TEST_CASE("render_report") {
    SUBCASE("table averages") {
        struct Row {
            VulnCategory c;
            double pr, nr, p, a;
        };
        const Row table[] = {
            {VulnCategory::Reentrancy, .76, .85, .91, .79},
            {VulnCategory::MissingEvent, .98, .60, .84, .86},
            {VulnCategory::Centralization, .95, .80, .94, .92},
            {VulnCategory::InputValidation, .93, .68, .86, .85},
            {VulnCategory::WeakRandomness, .73, 1.00, 1.00, .91},
            {VulnCategory::SandwichAttack, .89, 1.00, 1.00, .94},
            {VulnCategory::RedundantStatements, .92, .90, .84, .91},
            {VulnCategory::FlashloanAttack, 1.00, .92, .88, .95},
            {VulnCategory::TooManyDigits, 1.00, .78, .83, .89},
            {VulnCategory::ErrorMessage, .90, .98, .98, .94},
            {VulnCategory::ConstantOptimization, .92, .96, .90, .95},
            {VulnCategory::ReturnValueCheck, .99, .96, .97, .98},
            {VulnCategory::DivisionBeforeMultiplication, .98, .86, .88, .92},
        };
        std::map<VulnCategory, CategoryReport> rows;
        for (const auto& r : table) rows[r.c].metrics = {r.pr, r.nr, r.p, r.a};
        const auto report = render_report(rows);
        CHECK(std::abs(*report.average.positive_recall - 0.92) <= 0.005);
        CHECK(std::abs(*report.average.negative_recall - 0.87) <= 0.005);
        CHECK(std::abs(*report.average.precision - 0.91) <= 0.005);
        CHECK(std::abs(*report.average.accuracy - 0.91) <= 0.005);
        CHECK(report.markdown.find("| **Average** | 0.92 | 0.87 | 0.91 | 0.91 |") != std::string::npos);
        const auto j = nlohmann::json::parse(report.json);
        CHECK(j["categories"].size() == 13);
        CHECK(j["average"]["positive_recall"] == 0.92);
        CHECK(j["average"]["negative_recall"] == 0.87);
    }
    SUBCASE("single category, undefined values") {
        std::map<VulnCategory, CategoryReport> rows;
        rows[VulnCategory::Reentrancy].metrics = compute_metrics({0, 0, 5, 0});
        rows[VulnCategory::Reentrancy].matrix = ConfusionMatrix{0, 0, 5, 0};
        const auto report = render_report(rows);
        CHECK_FALSE(report.average.positive_recall.has_value());
        CHECK(*report.average.negative_recall == 1.0);
        CHECK(report.markdown.find("| reentrancy | n/a | 1.00 | n/a | 1.00 | 0 | 0 | 5 | 0 | 0 |") != std::string::npos);
        const auto j = nlohmann::json::parse(report.json);
        CHECK(j["average"]["positive_recall"].is_null());
        CHECK(j["categories"][0]["metrics"]["precision"].is_null());
    }
}

TEST_CASE("oracle equivalence on the synthetic manifest") {
    const auto manifest = load_manifest(kFixtures / "synthetic" / "manifest.jsonl");
    REQUIRE(manifest.instances.size() == 60);
    PipelineConfig cfg;
    for (std::uint64_t seed : {1, 2, 3}) {
        for (auto c : {VulnCategory::Reentrancy, VulnCategory::DivisionBeforeMultiplication}) {
            const auto set = sample_instances(manifest, c, seed, 1.0);
            const auto r = run_eval(set, cfg);
            ConfusionMatrix brute;
            for (const auto& rec : r.records) {
                if (!rec.verdict) continue;
                if (rec.positive && rec.verdict->is_vulnerable) ++brute.tp;
                if (rec.positive && !rec.verdict->is_vulnerable) ++brute.fn;
                if (!rec.positive && !rec.verdict->is_vulnerable) ++brute.tn;
                if (!rec.positive && rec.verdict->is_vulnerable) ++brute.fp;
            }
            CHECK(r.matrix == brute);
            CHECK(r.matrix.total() + r.errors == set.size());
        }
    }
}
