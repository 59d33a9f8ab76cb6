#include <doctest.h>

#include "scvd/context.hpp"
#include "scvd/errors.hpp"
#include "scvd/project.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace scvd;

namespace {

const fs::path kFixtures = fs::path(SCVD_FIXTURES_DIR);

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> signatures(const std::vector<FunctionRef>& refs) {
    std::vector<std::string> out;
    for (const auto& r : refs) out.push_back(r.file.empty() ? r.signature : r.display());
    return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST_CASE("collect_callstack") {
    const auto m = load_project_from_sources({{"G.sol", R"(
contract G {
    function a() public { b(); }
    function b() public { c(); }
    function c() public { d(); }
    function d() public {}
    function p() public { q(); }
    function q() public { p(); }
    function leaf() public {}
    function wide() public { d(); c(); d(); ghost(1); ghost(1); }
}
)"}});
    auto target = [&](const char* fn) { return find_function(m, "G", fn); };
    const auto& g = m.call_graph;

    CHECK(signatures(collect_callstack(g, target("a"), 2)) == std::vector<std::string>{"G.b()", "G.c()"});
    CHECK(signatures(collect_callstack(g, target("a"), 5)) == std::vector<std::string>{"G.b()", "G.c()", "G.d()"});
    CHECK(signatures(collect_callstack(g, target("p"), 5)) == std::vector<std::string>{"G.q()"});
    CHECK(collect_callstack(g, target("leaf"), 3).empty());
    CHECK(collect_callstack(g, target("a"), 0).empty());
    // breadth first, each callee once, unresolved callees by call text
    CHECK(signatures(collect_callstack(g, target("wide"), 1)) ==
          std::vector<std::string>{"G.d()", "G.c()", "ghost(1)"});
    CHECK(signatures(collect_callstack(g, target("wide"), 2)) ==
          std::vector<std::string>{"G.d()", "G.c()", "ghost(1)"});
}

TEST_CASE("extract_context on the vault fixture") {
    const auto m = load_project(kFixtures / "projects" / "vault");

    SUBCASE("withdraw") {
        const auto b = extract_context(m, find_function(m, "Vault", "withdraw"), VulnCategory::Reentrancy);
        CHECK(b.modifiers == std::vector<std::string>{"onlyOwner"});
        REQUIRE(b.modifiers_codes.size() == 1);
        CHECK(b.modifiers_codes[0].rfind("modifier onlyOwner()", 0) == 0);
        CHECK(contains(b.external_calls, "token.transfer(to, amount)"));
        CHECK(b.external_objects == std::vector<std::string>{"token"});
        CHECK(b.target_function.rfind("function withdraw(", 0) == 0);
        for (const auto& e : b.events) CHECK_FALSE(contains(b.external_calls, e));
    }
    SUBCASE("depth 0 keeps direct callees") {
        const auto target = find_function(m, "Vault", "deposit");
        const auto b0 = extract_context(m, target, VulnCategory::Reentrancy, 0);
        CHECK(b0.callstack.empty());
        CHECK(b0.internal_calls == std::vector<std::string>{"Vault._credit(address,uint256)"});
        CHECK_FALSE(b0.external_calls.empty());
        const auto b2 = extract_context(m, target, VulnCategory::Reentrancy, 2);
        REQUIRE(b2.callstack.size() == 1);
        CHECK(b2.callstack[0].signature == "Vault._credit(address,uint256)");
    }
    SUBCASE("errors") {
        FunctionRef ghost{"contracts/Vault.sol", "Vault", "ghost", {}, {}, false};
        CHECK_THROWS_AS(extract_context(m, ghost, VulnCategory::Reentrancy), NotFound);
        CHECK_THROWS_AS(extract_context(m, find_function(m, "Vault", "withdraw"), VulnCategory::Reentrancy, -1),
                        OutOfRange);
    }
}

TEST_CASE("extract_context with absent features") {
    const auto m = load_project_from_sources({{"P.sol", "contract P { uint x; function f() public { x = 1; } }"}});
    const auto b = extract_context(m, find_function(m, "P", "f"), VulnCategory::MissingEvent);
    CHECK(b.modifiers.empty());
    CHECK(b.modifiers_codes.empty());
    CHECK(b.constructor.empty());
    CHECK(b.initializer.empty());
    CHECK(b.internal_states == std::vector<std::string>{"uint x;"});
}

TEST_CASE("bundle JSON schema and round trip") {
    ContextBundle empty;
    empty.target_function = "function f() {}";
    const auto text = bundle_to_json(empty);
    CHECK(text.back() == '\n');
    const auto j = nlohmann::ordered_json::parse(text);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>(kBundleKeys.begin(), kBundleKeys.end()));
    CHECK(j["constructor"] == "");
    CHECK(j["callstack"].is_array());
    CHECK(bundle_from_json(text) == empty);

    ContextBundle full = empty;
    full.imports = {"import \"a.sol\";"};
    full.callstack = {{"C.g()", "function g() {}"}, {"ghost(1)", ""}};
    full.events = {"event E();", "emit E();"};
    full.initializer = "function initialize() {}";
    full.external_objects = {"token", "caf\xc3\xa9"};
    CHECK(bundle_from_json(bundle_to_json(full)) == full);
    CHECK(bundle_to_json(full) == bundle_to_json(full));

    CHECK_THROWS_AS(bundle_from_json("[]"), ConfigError);
    CHECK_THROWS_AS(bundle_from_json("{\"imports\": []}"), ConfigError);
    CHECK_THROWS_AS(bundle_from_json("not json"), ConfigError);
}

TEST_CASE("golden bundles") {
    struct Case {
        const char* project;
        const char* contract;
        const char* function;
    };
    const Case cases[] = {
        {"vault", "Vault", "withdraw"},     {"vault", "Vault", "deposit"},           {"vault", "Vault", "claim"},
        {"overload", "Vault", "withdraw"},  {"candidates", "Bank", "withdraw"},      {"filter", "Vault", "deposit"},
        {"staking", "Staking", "stake"},    {"staking", "Staking", "unstake"},       {"staking", "Staking", "reward"},
        {"staking", "BoostedStaking", "_afterStake"},
    };
    for (const auto& c : cases) {
        const std::string name = std::string(c.project) + "__" + c.contract + "." + c.function + ".json";
        CAPTURE(name);
        const auto m = load_project(kFixtures / "projects" / c.project);
        const auto target = find_function(m, c.contract, c.function);
        const auto json = bundle_to_json(extract_context(m, target, VulnCategory::Reentrancy));
        CHECK(json == slurp(kFixtures / "golden" / name));

        // every snippet is a verbatim slice of some retained file
        const auto b = bundle_from_json(json);
        std::vector<std::string> snippets = b.imports;
        snippets.insert(snippets.end(), b.internal_states.begin(), b.internal_states.end());
        snippets.insert(snippets.end(), b.modifiers_codes.begin(), b.modifiers_codes.end());
        snippets.insert(snippets.end(), b.events.begin(), b.events.end());
        snippets.insert(snippets.end(), b.external_calls.begin(), b.external_calls.end());
        snippets.push_back(b.target_function);
        for (const auto& e : b.callstack) {
            if (!e.source.empty()) snippets.push_back(e.source);
        }
        if (!b.constructor.empty()) snippets.push_back(b.constructor);
        if (!b.initializer.empty()) snippets.push_back(b.initializer);
        for (const auto& s : snippets) {
            const bool found = std::any_of(m.units.begin(), m.units.end(),
                                           [&](const auto& u) { return u->text().find(s) != std::string_view::npos; });
            CHECK_MESSAGE(found, s);
        }
    }
}

TEST_CASE("staking fixture: inheritance, initializer, guard, library, super") {
    const auto m = load_project(kFixtures / "projects" / "staking");
    const auto stake = extract_context(m, find_function(m, "Staking", "stake"), VulnCategory::Reentrancy);
    CHECK(stake.modifiers == std::vector<std::string>{"nonReentrant"});
    CHECK(contains(stake.internal_states, "uint256 private _status;"));
    CHECK(stake.initializer.rfind("function initialize(", 0) == 0);

    const auto boosted = extract_context(m, find_function(m, "BoostedStaking", "_afterStake"), VulnCategory::Reentrancy);
    CHECK(boosted.external_calls.empty());
    CHECK(boosted.internal_calls == std::vector<std::string>{"Staking._afterStake(address,uint256)"});
    CHECK(boosted.initializer == stake.initializer);

    const auto reward = extract_context(m, find_function(m, "Staking", "reward"), VulnCategory::DivisionBeforeMultiplication);
    CHECK(reward.internal_calls == std::vector<std::string>{"MathLib.mulDiv(uint256,uint256,uint256)"});
}
