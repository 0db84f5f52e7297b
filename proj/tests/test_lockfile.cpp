#include "depprune/lockfile.hpp"

#include "depprune/errors.hpp"
#include "depprune/paths.hpp"
#include "support/lockgen.hpp"

#include <doctest.h>

using namespace depprune;

namespace {

const char* kSmallLock = R"({
  "name": "app",
  "version": "1.0.0",
  "lockfileVersion": 3,
  "requires": true,
  "packages": {
    "": {
      "name": "app",
      "version": "1.0.0",
      "dependencies": {
        "a": "^1.0.0",
        "require-uncached": "^1.0.0",
        "resolve-from": "^2.0.0"
      },
      "devDependencies": {
        "b": "^1.0.0"
      }
    },
    "node_modules/a": {
      "version": "1.2.3",
      "resolved": "https://registry.invalid/a/-/a-1.2.3.tgz",
      "integrity": "sha512-xyz"
    },
    "node_modules/b": {
      "version": "0.1.0",
      "dev": true
    },
    "node_modules/require-uncached": {
      "version": "1.0.3",
      "dependencies": {
        "resolve-from": "^1.0.0"
      }
    },
    "node_modules/require-uncached/node_modules/resolve-from": {
      "version": "1.0.1"
    },
    "node_modules/resolve-from": {
      "version": "2.0.0"
    }
  }
})";

}  // namespace

TEST_CASE("scope split and direct flags") {
  const Lockfile lock = Lockfile::parse(kSmallLock);
  CHECK(lock.lockfile_version() == 3);
  CHECK(lock.root_name() == "app");

  const DependencyInstance* a = lock.find("node_modules/a");
  REQUIRE(a != nullptr);
  CHECK(a->scope == DepScope::runtime);
  CHECK(a->is_direct);
  CHECK(a->version == "1.2.3");

  const DependencyInstance* b = lock.find("node_modules/b");
  REQUIRE(b != nullptr);
  CHECK(b->scope == DepScope::dev);
  CHECK(b->is_direct);

  const DependencyInstance* nested =
      lock.find("node_modules/require-uncached/node_modules/resolve-from");
  REQUIRE(nested != nullptr);
  CHECK(nested->name == "resolve-from");
  CHECK_FALSE(nested->is_direct);

  CHECK(lock.runtime_instances() ==
        std::set<std::string>{
            "node_modules/a", "node_modules/require-uncached",
            "node_modules/require-uncached/node_modules/resolve-from",
            "node_modules/resolve-from"});
  CHECK(lock.dev_instances() == std::set<std::string>{"node_modules/b"});
}

TEST_CASE("lockfile v1 and malformed inputs are rejected") {
  CHECK_THROWS_AS(
      Lockfile::parse(R"({"lockfileVersion":1,"dependencies":{}})"),
      UnsupportedLockfileVersion);
  CHECK_THROWS_AS(Lockfile::parse(R"({"lockfileVersion":3})"),
                  UnsupportedLockfileVersion);
  CHECK_THROWS_AS(Lockfile::parse("not json"), MalformedDocument);
  CHECK_THROWS_AS(
      Lockfile::parse(
          R"({"lockfileVersion":3,"packages":{"somewhere/else":{}}})"),
      BadInstallPath);
  CHECK_THROWS_AS(
      Lockfile::parse(
          R"({"lockfileVersion":3,"packages":{"node_modules/a/../b":{}}})"),
      BadInstallPath);
}

TEST_CASE("resolution walks ancestors") {
  const Lockfile lock = Lockfile::parse(kSmallLock);
  CHECK(lock.resolve("", "a") == "node_modules/a");
  CHECK(lock.resolve("node_modules/require-uncached", "resolve-from") ==
        "node_modules/require-uncached/node_modules/resolve-from");
  CHECK(lock.resolve("node_modules/a", "resolve-from") ==
        "node_modules/resolve-from");
  CHECK_FALSE(lock.resolve("node_modules/a", "nope").has_value());
}

TEST_CASE("reachability basics") {
  const Lockfile lock = Lockfile::parse(kSmallLock);

  CHECK(lock.reachable_instances({}) == lock.runtime_instances());
  CHECK(lock.orphan_instances().empty());

  const auto without = lock.reachable_instances({"require-uncached"});
  CHECK(without ==
        std::set<std::string>{"node_modules/a", "node_modules/resolve-from"});

  CHECK_THROWS_AS(lock.reachable_instances({"not-direct"}),
                  UnknownDirectDependency);
}

TEST_CASE("unresolvable required edge is reported with the requester") {
  const char* broken = R"({
    "lockfileVersion": 3,
    "packages": {
      "": {"dependencies": {"a": "^1.0.0"}},
      "node_modules/a": {
        "version": "1.0.0",
        "dependencies": {"gone": "^1.0.0"}
      }
    }
  })";
  const Lockfile lock = Lockfile::parse(broken);
  try {
    lock.reachable_instances({});
    FAIL("expected UnresolvableDependency");
  } catch (const UnresolvableDependency& e) {
    CHECK(e.requester() == "node_modules/a");
    CHECK(e.name() == "gone");
  }
}

TEST_CASE("absent optional and peer edges are skipped silently") {
  const char* text = R"({
    "lockfileVersion": 3,
    "packages": {
      "": {"dependencies": {"a": "^1.0.0"}},
      "node_modules/a": {
        "version": "1.0.0",
        "peerDependencies": {"ghost-peer": "*"},
        "optionalDependencies": {"ghost-opt": "*"}
      }
    }
  })";
  const Lockfile lock = Lockfile::parse(text);
  CHECK(lock.reachable_instances({}) ==
        std::set<std::string>{"node_modules/a"});
}

TEST_CASE("lockfile with no instances") {
  const Lockfile lock =
      Lockfile::parse(R"({"lockfileVersion":3,"packages":{"":{}}})");
  CHECK(lock.instances().empty());
  CHECK(lock.runtime_instances().empty());
  CHECK(lock.dev_instances().empty());
  CHECK(lock.reachable_instances({}).empty());
}

TEST_CASE("orphans are modeled, not rejected") {
  const char* text = R"({
    "lockfileVersion": 3,
    "packages": {
      "": {"dependencies": {"a": "^1.0.0"}},
      "node_modules/a": {"version": "1.0.0"},
      "node_modules/stray": {"version": "9.9.9"}
    }
  })";
  const Lockfile lock = Lockfile::parse(text);
  CHECK(lock.orphan_instances() ==
        std::set<std::string>{"node_modules/stray"});
}

TEST_CASE("round-trip is structural identity") {
  const Lockfile lock = Lockfile::parse(kSmallLock);
  const std::string out = lock.serialize();
  const Lockfile again = Lockfile::parse(out);
  CHECK(again == lock);
  CHECK(again.serialize() == out);
}

TEST_CASE("generated lockfiles parse and agree with the generator") {
  std::mt19937 rng(7);
  for (int i = 0; i < 25; ++i) {
    const auto g = lockgen::generate(rng);
    const Lockfile lock = Lockfile::parse(g.text);

    CHECK(lock.runtime_instances() == g.runtime_paths());
    CHECK(lock.runtime_instances().size() + lock.dev_instances().size() ==
          lock.instances().size());

    for (const auto& inst : lock.instances()) {
      CHECK(paths::name_from_install_path(inst.install_path) == inst.name);
    }

    CHECK(Lockfile::parse(lock.serialize()) == lock);
  }
}

TEST_CASE("reachability equals the brute-force oracle") {
  std::mt19937 rng(42);
  for (int i = 0; i < 120; ++i) {
    const auto g = lockgen::generate(rng);
    const Lockfile lock = Lockfile::parse(g.text);
    const auto excluded = lockgen::random_exclusion(rng, g);

    CHECK(lock.reachable_instances(excluded) ==
          lockgen::oracle_reachable(g, excluded));
  }
}

TEST_CASE("reachability is monotone in the exclusion set") {
  std::mt19937 rng(11);
  for (int i = 0; i < 40; ++i) {
    const auto g = lockgen::generate(rng);
    const Lockfile lock = Lockfile::parse(g.text);

    auto larger = lockgen::random_exclusion(rng, g);
    auto smaller = larger;
    if (!smaller.empty()) smaller.erase(smaller.begin());

    const auto with_more = lock.reachable_instances(larger);
    const auto with_fewer = lock.reachable_instances(smaller);
    for (const auto& path : with_more) {
      CHECK(with_fewer.count(path) == 1);
    }
    for (const auto& path : with_fewer) {
      CHECK(lock.find(path)->scope == DepScope::runtime);
    }
  }
}

TEST_CASE("exclusive-subtree fixture: 681 instances") {
  const auto g = lockgen::exclusive_subtree_shape();
  const Lockfile lock = Lockfile::parse(g.text);

  CHECK(lock.runtime_instances().size() == 681);
  CHECK(lock.reachable_instances({}).size() == 681);
  CHECK(lock.reachable_instances({"mega"}) ==
        std::set<std::string>{"node_modules/leaf"});
}
