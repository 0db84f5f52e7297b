#include "depprune/transform.hpp"

#include "depprune/errors.hpp"
#include "support/lockgen.hpp"

#include <doctest.h>

#include <random>

using namespace depprune;

namespace {

const char* kManifest = R"({
  "name": "app",
  "version": "1.0.0",
  "dependencies": {
    "a": "^1.0.0",
    "b": "^1.0.0",
    "c": "^1.0.0"
  },
  "devDependencies": {
    "d": "^1.0.0"
  }
})";

Manifest generated_manifest(const lockgen::GeneratedLockfile& g) {
  ojson doc;
  doc["name"] = "gen-root";
  doc["version"] = "1.0.0";
  ojson deps;
  for (const auto& name : g.root_runtime) deps[name] = "^1.0.0";
  doc["dependencies"] = std::move(deps);
  ojson dev;
  for (const auto& name : g.root_dev) dev[name] = "^1.0.0";
  if (!dev.empty()) doc["devDependencies"] = std::move(dev);
  return Manifest::from_document(std::move(doc));
}

// Required edges of surviving instances must resolve in the written output.
void check_survivors_resolve(const Lockfile& lock) {
  for (const auto& inst : lock.instances()) {
    for (const auto& edge : inst.declared_deps) {
      if (edge.kind == EdgeKind::required) {
        CHECK(lock.resolve(inst.install_path, edge.name).has_value());
      }
    }
  }
  for (const auto& [dep, range] : lock.root_runtime_deps()) {
    (void)range;
    CHECK(lock.resolve("", dep).has_value());
  }
}

}  // namespace

TEST_CASE("plans mirror the report per strategy") {
  BloatReport report;
  report.direct_bloated = {"x", "y"};
  report.unaccessed = {"node_modules/x", "node_modules/y", "node_modules/z"};

  const DebloatPlan direct = make_plan(report, DebloatStrategy::direct_only);
  CHECK(direct.remove_direct == report.direct_bloated);
  CHECK(direct.remove_instances.empty());

  const DebloatPlan full = make_plan(report, DebloatStrategy::full_scale);
  CHECK(full.remove_instances == report.unaccessed);
  for (const auto& name : full.remove_direct) {
    CHECK(full.remove_instances.count("node_modules/" + name) == 1);
  }

  const DebloatPlan empty = make_plan(BloatReport{}, DebloatStrategy::full_scale);
  CHECK(empty.remove_direct.empty());
  CHECK(empty.remove_instances.empty());
}

TEST_CASE("apply_direct removes names in place") {
  const Manifest manifest = Manifest::parse(kManifest);

  DebloatPlan plan;
  plan.strategy = DebloatStrategy::direct_only;
  plan.remove_direct = {"b"};
  const Manifest pruned = apply_direct(manifest, plan);
  REQUIRE(pruned.runtime_deps().size() == 2);
  CHECK(pruned.runtime_deps()[0].first == "a");
  CHECK(pruned.runtime_deps()[1].first == "c");
  CHECK(pruned.dev_deps().size() == 1);

  DebloatPlan noop;
  CHECK(apply_direct(manifest, noop) == manifest);

  DebloatPlan dev_name;
  dev_name.remove_direct = {"d"};
  CHECK_THROWS_AS(apply_direct(manifest, dev_name), UnknownDirectDependency);
}

TEST_CASE("apply_full removes closed subtrees without dangling refs") {
  const char* lock_text = R"({
    "lockfileVersion": 3,
    "packages": {
      "": {"dependencies": {"a": "*", "y": "*"}},
      "node_modules/a": {"version": "1.0.0"},
      "node_modules/y": {"version": "1.0.0", "dependencies": {"x": "*"}},
      "node_modules/x": {"version": "1.0.0"}
    }
  })";
  const Lockfile lock = Lockfile::parse(lock_text);
  const Manifest manifest = Manifest::parse(
      R"({"name":"app","dependencies":{"a":"*","y":"*"}})");

  DebloatPlan plan;
  plan.strategy = DebloatStrategy::full_scale;
  plan.remove_instances = {"node_modules/x", "node_modules/y"};
  plan.remove_direct = {"y"};

  const TransformResult result = apply_full(lock, manifest, plan);
  CHECK(result.lock.find("node_modules/x") == nullptr);
  CHECK(result.lock.find("node_modules/y") == nullptr);
  CHECK(result.lock.instances().size() == 1);
  CHECK(result.manifest.runtime_deps().size() == 1);
  CHECK(result.manifest.runtime_deps()[0].first == "a");
  check_survivors_resolve(result.lock);
}

TEST_CASE("empty plan is byte-identical") {
  const auto g = lockgen::exclusive_subtree_shape();
  const Lockfile lock = Lockfile::parse(g.text);
  const Manifest manifest = Manifest::parse(kManifest);

  DebloatPlan plan;
  plan.strategy = DebloatStrategy::full_scale;
  const TransformResult result = apply_full(lock, manifest, plan);
  CHECK(result.lock.serialize() == lock.serialize());
  CHECK(result.manifest.serialize() == manifest.serialize());
}

TEST_CASE("shadowed removal needs the fallback flag") {
  const char* lock_text = R"({
    "lockfileVersion": 3,
    "packages": {
      "": {"dependencies": {"require-uncached": "*", "resolve-from": "*"}},
      "node_modules/require-uncached": {
        "version": "1.0.3",
        "dependencies": {"resolve-from": "^1.0.0"}
      },
      "node_modules/require-uncached/node_modules/resolve-from": {"version": "1.0.1"},
      "node_modules/resolve-from": {"version": "2.0.0"}
    }
  })";
  const Lockfile lock = Lockfile::parse(lock_text);
  const Manifest manifest = Manifest::parse(
      R"({"name":"app","dependencies":{"require-uncached":"*","resolve-from":"*"}})");

  DebloatPlan plan;
  plan.strategy = DebloatStrategy::full_scale;
  plan.remove_instances = {
      "node_modules/require-uncached/node_modules/resolve-from"};

  CHECK_THROWS_AS(apply_full(lock, manifest, plan, false),
                  RemovalBreaksSurvivor);

  const TransformResult allowed = apply_full(lock, manifest, plan, true);
  CHECK(allowed.lock.find(
            "node_modules/require-uncached/node_modules/resolve-from") ==
        nullptr);
  // The surviving reference stays; it now resolves to the root copy.
  CHECK(allowed.lock.resolve("node_modules/require-uncached", "resolve-from") ==
        "node_modules/resolve-from");

  std::set<std::string> dropped;
  const TransformResult closed =
      apply_full_with_closure(lock, manifest, plan, false, &dropped);
  CHECK(dropped == plan.remove_instances);
  CHECK(closed.lock.serialize() == lock.serialize());
}

TEST_CASE("removing a root dev declaration's instance is refused") {
  const char* lock_text = R"({
    "lockfileVersion": 3,
    "packages": {
      "": {"dependencies": {"a": "*"}, "devDependencies": {"tool": "*"}},
      "node_modules/a": {"version": "1.0.0", "dependencies": {"tool": "*"}},
      "node_modules/tool": {"version": "1.0.0"}
    }
  })";
  const Lockfile lock = Lockfile::parse(lock_text);
  const Manifest manifest = Manifest::parse(
      R"({"name":"app","dependencies":{"a":"*"},"devDependencies":{"tool":"*"}})");

  DebloatPlan plan;
  plan.strategy = DebloatStrategy::full_scale;
  plan.remove_instances = {"node_modules/tool"};
  CHECK_THROWS_AS(apply_full(lock, manifest, plan, false),
                  RemovalBreaksSurvivor);

  std::set<std::string> dropped;
  const TransformResult closed =
      apply_full_with_closure(lock, manifest, plan, false, &dropped);
  CHECK(dropped == std::set<std::string>{"node_modules/tool"});
  CHECK(closed.manifest.dev_deps().size() == 1);
}

TEST_CASE("stage_direct prunes to the reachable tree") {
  const auto g = lockgen::exclusive_subtree_shape();
  const Lockfile lock = Lockfile::parse(g.text);
  const Manifest manifest = Manifest::parse(
      R"({"name":"app","dependencies":{"mega":"^1.0.0","leaf":"^1.0.0"}})");

  DebloatPlan plan;
  plan.strategy = DebloatStrategy::direct_only;
  plan.remove_direct = {"mega"};

  const TransformResult staged = stage_direct(lock, manifest, plan);
  CHECK(staged.lock.instances().size() == 1);
  CHECK(staged.lock.find("node_modules/leaf") != nullptr);
  CHECK(staged.manifest.runtime_deps().size() == 1);
  CHECK(staged.manifest.runtime_deps()[0].first == "leaf");
  check_survivors_resolve(staged.lock);
}

TEST_CASE("legacy v2 dependencies block is dropped only on real edits") {
  const char* v2_text = R"({
    "name": "app",
    "lockfileVersion": 2,
    "packages": {
      "": {"dependencies": {"a": "*", "b": "*"}},
      "node_modules/a": {"version": "1.0.0"},
      "node_modules/b": {"version": "1.0.0"}
    },
    "dependencies": {
      "a": {"version": "1.0.0"},
      "b": {"version": "1.0.0"}
    }
  })";
  const Lockfile lock = Lockfile::parse(v2_text);
  const Manifest manifest =
      Manifest::parse(R"({"name":"app","dependencies":{"a":"*","b":"*"}})");

  DebloatPlan noop;
  noop.strategy = DebloatStrategy::full_scale;
  const TransformResult unchanged = apply_full(lock, manifest, noop);
  CHECK(unchanged.lock.serialize() == lock.serialize());
  CHECK(unchanged.warnings.empty());

  DebloatPlan real;
  real.strategy = DebloatStrategy::full_scale;
  real.remove_instances = {"node_modules/b"};
  const TransformResult edited = apply_full(lock, manifest, real);
  CHECK_FALSE(edited.lock.document().contains("dependencies"));
  REQUIRE(edited.warnings.size() == 1);
}

TEST_CASE("full-scale transform soundness on random trees") {
  std::mt19937 rng(321);
  for (int i = 0; i < 60; ++i) {
    const auto g = lockgen::generate(rng);
    const Lockfile lock = Lockfile::parse(g.text);
    const Manifest manifest = generated_manifest(g);
    const auto accessed = lockgen::random_access_set(rng, g);
    const BloatReport report = detect(lock, accessed);
    DebloatPlan plan = make_plan(report, DebloatStrategy::full_scale);

    std::set<std::string> dropped;
    const TransformResult result =
        apply_full_with_closure(lock, manifest, plan, false, &dropped);

    // (a) no removed path survives
    for (const auto& path : plan.remove_instances) {
      if (!dropped.count(path)) {
        CHECK(result.lock.find(path) == nullptr);
      }
    }
    // (b) every surviving declared dep resolves
    check_survivors_resolve(result.lock);

    // (c) idempotence: the realized plan applied to its own output is a no-op
    DebloatPlan realized = plan;
    for (const auto& path : dropped) realized.remove_instances.erase(path);
    const TransformResult twice =
        apply_full(result.lock, result.manifest, realized, false);
    CHECK(twice.lock.serialize() == result.lock.serialize());
    CHECK(twice.manifest.serialize() == result.manifest.serialize());

    // (d) output round-trips through parse
    const Lockfile reparsed = Lockfile::parse(result.lock.serialize());
    CHECK(reparsed == result.lock);
  }
}
