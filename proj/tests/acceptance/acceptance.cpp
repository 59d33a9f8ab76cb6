// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails. Runs offline: the llm check talks to a local stub.

#include "roundtrip.hpp"
#include "support.hpp"

#include "scvd/backends.hpp"
#include "scvd/context.hpp"
#include "scvd/errors.hpp"
#include "scvd/eval.hpp"
#include "scvd/parser.hpp"
#include "scvd/project.hpp"
#include "scvd/prompt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace scvd;
using namespace scvd::testing;

namespace {

const fs::path kFixtures = fs::path(SCVD_FIXTURES_DIR);

struct Outcome {
    bool pass = true;
    std::string detail;
    std::vector<std::string> problems;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (problems.size() < 10) problems.push_back(what);
        }
    }
};

// 1 ----------------------------------------------------------------------

Outcome parser_corpus() {
    Outcome o;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(kFixtures / "corpus")) {
        if (e.path().extension() == ".sol") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    o.expect(files.size() >= 30, "only " + std::to_string(files.size()) + " corpus files");

    std::vector<std::string> sources;
    for (const auto& f : files) sources.push_back(slurp(f));

    std::size_t statements = 0, expressions = 0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto name = files[i].filename().string();
        const auto lossless = check_lossless(sources[i]);
        o.expect(lossless.empty(), name + ": " + lossless);
        try {
            const auto unit = parse_source_unit(sources[i], name);
            for (const auto& d : unit.diagnostics)
                o.expect(d.find("contract skipped") == std::string::npos, name + ": " + d);
            const auto rt = round_trip(unit);
            for (const auto& f : rt.failures) o.expect(false, name + ": " + f);
            o.expect(spans_nested(unit), name + ": child span outside its parent");
            statements += rt.statements;
            expressions += rt.expressions;
        } catch (const std::exception& e) {
            o.expect(false, name + ": " + e.what());
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.expect(seconds < 5.0, "took " + std::to_string(seconds) + " s");
    std::ostringstream d;
    d << files.size() << " files, " << statements << " statements and " << expressions
      << " expressions reparsed from their spans, " << std::fixed << std::setprecision(2) << seconds << " s";
    o.detail = d.str();
    return o;
}

// 2 ----------------------------------------------------------------------

Outcome golden_bundles() {
    Outcome o;
    std::set<std::string> projects;
    std::size_t files = 0;
    std::map<std::string, ProjectModel> models;
    std::vector<fs::path> goldens;
    for (const auto& e : fs::directory_iterator(kFixtures / "golden")) goldens.push_back(e.path());
    std::sort(goldens.begin(), goldens.end());
    for (const auto& path : goldens) {
        // <project>__<Contract>.<function>.json
        const auto stem = path.stem().string();
        const auto sep = stem.find("__");
        const auto dot = stem.find('.', sep);
        if (sep == std::string::npos || dot == std::string::npos) {
            o.expect(false, "unexpected golden name " + stem);
            continue;
        }
        const auto project = stem.substr(0, sep);
        const auto contract = stem.substr(sep + 2, dot - sep - 2);
        const auto function = stem.substr(dot + 1);
        try {
            auto it = models.find(project);
            if (it == models.end()) it = models.emplace(project, load_project(kFixtures / "projects" / project)).first;
            const auto& m = it->second;
            const auto json = bundle_to_json(extract_context(m, find_function(m, contract, function),
                                                             VulnCategory::Reentrancy));
            const auto golden = slurp(path);
            o.expect(json == golden, stem + ": output differs from the golden file");
            const auto parsed = nlohmann::ordered_json::parse(golden);
            std::vector<std::string> keys;
            for (const auto& item : parsed.items()) keys.push_back(item.key());
            o.expect(keys == std::vector<std::string>(kBundleKeys.begin(), kBundleKeys.end()),
                     stem + ": keys missing or out of order");
            projects.insert(project);
            ++files;
        } catch (const std::exception& e) {
            o.expect(false, stem + ": " + e.what());
        }
    }
    o.expect(projects.size() >= 5, "only " + std::to_string(projects.size()) + " projects");
    o.detail = std::to_string(files) + " golden bundles over " + std::to_string(projects.size()) +
               " projects, byte-identical with 12 keys in order";
    return o;
}

// 3 ----------------------------------------------------------------------

Outcome reentrancy_conformance() {
    Outcome o;
    const auto m = load_project(kFixtures / "conformance");
    const auto labels = nlohmann::json::parse(slurp(kFixtures / "conformance" / "labels.json"));
    std::size_t agree = 0;
    std::set<std::string> rules;
    for (const auto& l : labels) {
        const auto contract = l["contract"].get<std::string>();
        try {
            const auto v = rule_detect_reentrancy(m, find_function(m, contract, l["function"].get<std::string>()));
            const bool ok = v.is_vulnerable == l["vulnerable"].get<bool>() &&
                            (!l.contains("snippet") || v.code_snippet == l["snippet"].get<std::string>());
            o.expect(ok, contract + " (" + l["rule"].get<std::string>() + ") disagrees with its label");
            agree += ok;
        } catch (const std::exception& e) {
            o.expect(false, contract + ": " + e.what());
        }
        rules.insert(l["rule"].get<std::string>());
    }
    o.expect(labels.size() == 12, "expected 12 cases, found " + std::to_string(labels.size()));
    o.expect(rules.size() == labels.size(), "cases do not each encode a distinct rule");
    o.detail = std::to_string(agree) + "/" + std::to_string(labels.size()) + " cases agree with hand labels";
    return o;
}

// 4 ----------------------------------------------------------------------

Outcome metric_arithmetic() {
    Outcome o;
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
    const auto j = nlohmann::json::parse(report.json);
    const std::pair<const char*, double> expected[] = {
        {"positive_recall", 0.92}, {"negative_recall", 0.87}, {"precision", 0.91}, {"accuracy", 0.91}};
    std::ostringstream d;
    d << std::fixed << std::setprecision(4);
    for (const auto& [key, want] : expected) {
        const auto& v = j["average"][key];
        const bool ok = v.is_number() && std::abs(v.get<double>() - want) <= 0.005;
        o.expect(ok, std::string(key) + " average is " + v.dump() + ", want " + std::to_string(want));
    }
    o.expect(report.markdown.find("| **Average** | 0.92 | 0.87 | 0.91 | 0.91 |") != std::string::npos,
             "markdown average row differs");
    d << "average row " << *report.average.positive_recall << " / " << *report.average.negative_recall << " / "
      << *report.average.precision << " / " << *report.average.accuracy << " (unrounded)";
    o.detail = d.str();
    return o;
}

// 5 ----------------------------------------------------------------------

Outcome oracle_equivalence() {
    Outcome o;
    const auto manifest = load_manifest(kFixtures / "synthetic" / "manifest.jsonl");
    o.expect(manifest.instances.size() == 60, "manifest has " + std::to_string(manifest.instances.size()) +
                                                  " instances, expected 60");
    std::map<std::string, const Instance*> by_id;
    for (const auto& i : manifest.instances) by_id[i.id] = &i;

    // Verdicts recomputed one instance at a time, outside the harness.
    std::map<fs::path, ProjectModel> models;
    auto direct = [&](const Instance& inst) {
        auto it = models.find(inst.project_path);
        if (it == models.end()) it = models.emplace(inst.project_path, load_project(inst.project_path)).first;
        std::optional<std::string_view> sig;
        if (inst.signature) sig = *inst.signature;
        return rule_detect(inst.category, it->second, find_function(it->second, inst.contract, inst.function, sig));
    };

    std::set<VulnCategory> categories;
    for (const auto& i : manifest.instances) {
        if (i.positive && rules_support(i.category)) categories.insert(i.category);
    }

    std::size_t runs = 0, records = 0;
    ConfusionMatrix overall;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const double ratio = 1.0 + 0.25 * static_cast<double>(seed - 1);
        for (auto c : categories) {
            const auto tag = std::string(to_string(c)) + " seed " + std::to_string(seed);
            const auto set = sample_instances(manifest, c, seed, ratio);
            const auto result = run_eval(set, PipelineConfig{});
            ConfusionMatrix brute;
            for (const auto& rec : result.records) {
                o.expect(rec.verdict.has_value(), tag + ": " + rec.id + " failed at " + rec.stage + ": " + rec.error);
                if (!rec.verdict) continue;
                const auto* inst = by_id.at(rec.id);
                const bool flagged = direct(*inst).is_vulnerable;
                o.expect(flagged == rec.verdict->is_vulnerable, tag + ": " + rec.id + " verdict differs");
                (inst->positive ? (flagged ? brute.tp : brute.fn) : (flagged ? brute.fp : brute.tn))++;
            }
            o.expect(result.matrix == brute, tag + ": matrix differs from the recount");
            o.expect(result.records.size() == set.size(), tag + ": records missing");
            overall.tp += result.matrix.tp;
            overall.fn += result.matrix.fn;
            overall.tn += result.matrix.tn;
            overall.fp += result.matrix.fp;
            ++runs;
            records += result.records.size();
        }
    }
    o.detail = std::to_string(runs) + " category runs over 5 seeds, " + std::to_string(records) +
               " records recounted (TP " + std::to_string(overall.tp) + ", FN " + std::to_string(overall.fn) +
               ", TN " + std::to_string(overall.tn) + ", FP " + std::to_string(overall.fp) + ")";
    return o;
}

// 6 ----------------------------------------------------------------------

std::string random_code(std::mt19937_64& rng, std::size_t bytes) {
    static const std::vector<std::string> words = {
        "uint256", "balances[msg.sender]", "=", "0;", "require(ok, \"failed\");", "\n    ", "emit", "Paid(to, amount);",
        "(bool ok, ) = to.call{value: amount}(\"\");", "\\", "\t", "// note\n", "if (x > 1) {", "}", "return", "x;",
        "token.transfer(to, amount);", "mapping(address => uint256) public shares;", "'quoted'", "{", "_;",
    };
    std::string s;
    while (s.size() < bytes) {
        s += words[rng() % words.size()];
        s += ' ';
    }
    s.resize(bytes);
    return s;
}

Outcome budget_property() {
    Outcome o;
    std::mt19937_64 rng(20240601);
    auto between = [&](std::size_t lo, std::size_t hi) { return lo + rng() % (hi - lo + 1); };
    auto list = [&](std::size_t max_items, std::size_t max_bytes) {
        std::vector<std::string> v(between(0, max_items));
        for (auto& s : v) s = random_code(rng, between(1, max_bytes));
        return v;
    };

    const auto bundled = load_example_store(default_prompts_dir());
    std::size_t untouched = 0, truncated = 0, impossible = 0;
    for (int round = 0; round < 200; ++round) {
        const auto tag = "round " + std::to_string(round);
        ContextBundle b;
        b.imports = list(6, 120);
        b.internal_states = list(12, 150);
        b.target_function = random_code(rng, round % 10 == 0 ? between(12000, 30000) : between(50, 6000));
        for (std::size_t i = 0, n = between(0, 30); i < n; ++i)
            b.callstack.push_back({"C.f" + std::to_string(i) + "()", random_code(rng, between(20, 1500))});
        b.modifiers = list(3, 30);
        b.modifiers_codes = list(3, 600);
        b.constructor = rng() % 2 ? random_code(rng, between(10, 800)) : "";
        b.initializer = rng() % 3 ? "" : random_code(rng, between(10, 800));
        b.internal_calls = list(8, 60);
        b.external_calls = list(8, 120);
        b.external_objects = list(4, 30);
        b.events = list(8, 200);

        ExampleStore store;
        VulnCategory category = kAllCategories[rng() % kAllCategories.size()];
        if (round % 2 == 0) {
            store = bundled;
        } else {
            category = VulnCategory::Reentrancy;
            CategoryPrompts cp;
            cp.instruction = random_code(rng, between(100, 5000));
            for (std::size_t i = 0, n = between(2, 6); i < n; ++i) {
                Example e;
                e.name = "ex" + std::to_string(i);
                e.positive = i == 0 || (i != 1 && rng() % 2);
                e.code = random_code(rng, between(50, 3000));
                e.explanation = random_code(rng, between(20, 1000));
                e.source = "synthetic";
                cp.examples.push_back(e);
            }
            store.categories[category] = cp;
        }

        try {
            const auto p = assemble_prompt(category, b, store, {kDefaultTokenBudget, false});
            o.expect(estimate_tokens(p.text) <= kDefaultTokenBudget, tag + ": over budget");
            o.expect(p.token_count == estimate_tokens(p.text), tag + ": token count mismatch");
            o.expect(p.bundle.target_function == b.target_function, tag + ": target function changed");
            o.expect(p.text.find(nlohmann::json(b.target_function).dump()) != std::string::npos,
                     tag + ": target function missing from the prompt");
            (p.dropped.empty() ? untouched : truncated)++;
        } catch (const BudgetImpossible&) {
            ++impossible;
        } catch (const std::exception& e) {
            o.expect(false, tag + ": " + e.what());
        }
    }
    // The generator has to reach every regime for the property to mean much.
    o.expect(untouched > 0 && truncated > 0 && impossible > 0, "generator missed a regime");
    o.detail = "200 assemblies: " + std::to_string(untouched) + " fit as is, " + std::to_string(truncated) +
               " fit after truncation, " + std::to_string(impossible) + " BudgetImpossible";
    return o;
}

// 7 ----------------------------------------------------------------------

Outcome sampling_property() {
    Outcome o;
    std::mt19937_64 rng(777);
    std::size_t shortest = SIZE_MAX, longest = 0;
    for (int round = 0; round < 100; ++round) {
        const auto tag = "triple " + std::to_string(round);
        const auto category = kAllCategories[rng() % kAllCategories.size()];
        const std::size_t positives = 1 + rng() % 60;
        const std::size_t negatives = 2 * positives + rng() % 40;
        const std::uint64_t seed = rng();
        // every tenth triple sits on an end of the ratio range
        const double ratio =
            round % 10 == 0 ? (round % 20 == 0 ? 2.0 : 1.0) : 1.0 + static_cast<double>(rng() % 1001) / 1000.0;

        DatasetManifest m;
        auto add = [&](const std::string& id, VulnCategory c, bool positive) {
            Instance i;
            i.id = id;
            i.category = c;
            i.positive = positive;
            m.instances.push_back(i);
        };
        for (std::size_t i = 0; i < positives; ++i) add("p" + std::to_string(i), category, true);
        for (std::size_t i = 0; i < negatives; ++i) add("n" + std::to_string(i), category, false);
        const auto other = kAllCategories[(static_cast<std::size_t>(category) + 1) % kAllCategories.size()];
        for (int i = 0; i < 5; ++i) add("x" + std::to_string(i), other, i % 2 == 0);

        try {
            const auto a = sample_instances(m, category, seed, ratio);
            const auto n = a.negatives.size();
            o.expect(n >= positives && n <= 2 * positives, tag + ": " + std::to_string(n) + " negatives for " +
                                                                std::to_string(positives) + " positives");
            o.expect(n == static_cast<std::size_t>(std::llround(ratio * static_cast<double>(positives))),
                     tag + ": negative count is not round(ratio * P)");
            o.expect(a.positives.size() == positives, tag + ": positives not all taken");
            std::set<std::string> ids;
            for (const auto& i : a.negatives) {
                ids.insert(i.id);
                o.expect(!i.positive && i.category == category, tag + ": wrong instance " + i.id);
            }
            o.expect(ids.size() == n, tag + ": duplicate negatives");

            std::shuffle(m.instances.begin(), m.instances.end(), rng);
            const auto b = sample_instances(m, category, seed, ratio);
            auto id_list = [](const EvalSet& s) {
                std::vector<std::string> v;
                for (const auto& i : s.instances()) v.push_back(i.id);
                return v;
            };
            o.expect(id_list(a) == id_list(b), tag + ": same seed gave a different sample");
            shortest = std::min(shortest, n);
            longest = std::max(longest, n);
        } catch (const std::exception& e) {
            o.expect(false, tag + ": " + e.what());
        }
    }
    o.detail = "100 (pool, seed, ratio) triples, negatives " + std::to_string(shortest) + ".." +
               std::to_string(longest) + ", identical on re-sampling";
    return o;
}

// 8 ----------------------------------------------------------------------

Outcome llm_transport() {
    Outcome o;
    const std::string prompt = "=== Instruction ===\nQuotes \" and \\ backslashes, tabs\t, unicode caf\xc3\xa9 \xe2\x98\x95,"
                               " <code>{\"a\": [1, 2]}</code>\r\n\n=== Output ===\n";
    {
        StubServer stub;
        stub.reply = "{\"is_vulnerable\": true, \"code_snippet\": \"balances[msg.sender] = 0;\"}";
        const auto text = llm_request(stub.config(), prompt, [](std::chrono::milliseconds) {});
        const auto body = nlohmann::json::parse(stub.last_body);
        o.expect(body["messages"][0]["content"].get<std::string>() == prompt, "prompt altered in transit");
        o.expect(body["messages"][0]["role"] == "user", "prompt not sent as the user message");
        o.expect(stub.last_auth == "Bearer test-key", "missing bearer credential");
        o.expect(text == stub.reply, "first choice text not returned verbatim");
    }
    std::string delays;
    {
        StubServer stub;
        stub.script = {429, 429};
        RecordingSleeper sleeper;
        llm_request(stub.config(), prompt, sleeper.fn());
        o.expect(stub.hits == 3, "expected 3 requests, saw " + std::to_string(stub.hits.load()));
        o.expect(sleeper.delays.size() == 2, "expected 2 backoff sleeps");
        if (sleeper.delays.size() == 2) {
            const auto d0 = sleeper.delays[0].count(), d1 = sleeper.delays[1].count();
            o.expect(d0 >= 1000 && d0 <= 1500, "first backoff " + std::to_string(d0) + " ms");
            o.expect(d1 >= 2000 && d1 <= 3000, "second backoff " + std::to_string(d1) + " ms");
            delays = std::to_string(d0) + " ms, " + std::to_string(d1) + " ms";
        }
    }
    {
        StubServer stub;
        stub.script = {429, 429, 429, 429};
        RecordingSleeper sleeper;
        bool gave_up = false;
        try {
            llm_request(stub.config(), prompt, sleeper.fn());
        } catch (const BackendUnavailable&) {
            gave_up = true;
        }
        o.expect(gave_up && stub.hits == 4, "persistent 429 did not end in BackendUnavailable after 4 attempts");
    }

    const auto bare = parse_verdict(R"({"is_vulnerable": true, "code_snippet": "balances[msg.sender] = 0;"})");
    o.expect(bare.is_vulnerable && bare.code_snippet == "balances[msg.sender] = 0;", "bare JSON shape");
    const auto fenced = parse_verdict("Sure! ```json\n{\"is_vulnerable\": false}\n```");
    o.expect(!fenced.is_vulnerable && !fenced.code_snippet, "fenced JSON shape");
    bool refused = false;
    try {
        parse_verdict("The function looks safe to me.");
    } catch (const UnparseableResponse&) {
        refused = true;
    }
    o.expect(refused, "missing schema accepted");

    o.detail = "prompt byte-exact, 429 x2 retried after " + delays + ", 3 response shapes handled";
    return o;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"parser-corpus", parser_corpus},
        {"golden-bundles", golden_bundles},
        {"reentrancy-conformance", reentrancy_conformance},
        {"metric-arithmetic", metric_arithmetic},
        {"oracle-equivalence", oracle_equivalence},
        {"budget-property", budget_property},
        {"sampling-property", sampling_property},
        {"llm-transport", llm_transport},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.expect(false, std::string("uncaught: ") + e.what());
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << "\n";
        for (const auto& p : o.problems) std::cout << "    " << p << "\n";
        failed += !o.pass;
    }
    std::cout << (failed ? std::to_string(failed) + " of 8 criteria failed" : std::string("all 8 criteria passed"))
              << std::endl;
    return failed ? 1 : 0;
}
