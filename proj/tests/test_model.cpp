#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ldlab/model.hpp"

using namespace ldlab;

#ifndef LDLAB_MODELS_DIR
#define LDLAB_MODELS_DIR "models"
#endif

namespace {
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("all nine builtins construct and validate") {
  auto names = builtin_model_names();
  REQUIRE(names.size() == 9);
  for (const auto& name : names) {
    ModelSpec m = builtin_model(name);
    CHECK(m.name == name);
    ValidationReport rep = validate_model(m, 2000, 8.0);
    CHECK_MESSAGE(rep.ok, name);
  }
}

TEST_CASE("serialization round-trips every builtin") {
  for (const auto& name : builtin_model_names()) {
    ModelSpec m = builtin_model(name);
    std::string text = model_to_json(m);
    ModelSpec back = parse_model_json(text);
    CHECK(model_to_json(back) == text);
    CHECK(back.name == m.name);
    CHECK(back.transitions.size() == m.transitions.size());
    CHECK(back.offspring.size() == m.offspring.size());
    CHECK(back.params == m.params);
  }
}

TEST_CASE("bundled model files match the in-code constructors") {
  for (const auto& name : builtin_model_names()) {
    std::string disk = slurp(std::string(LDLAB_MODELS_DIR) + "/" + name +
                             ".json");
    // generator appends one newline
    CHECK(disk == model_to_json(builtin_model(name)) + "\n");
  }
}

TEST_CASE("rate evaluation uses parameters") {
  ModelSpec m = builtin_model("birth_death_immigration");
  bool found = false;
  for (const auto& t : m.transitions) {
    if (t.kind == TransitionKind::immigration) {
      found = true;
      CHECK(m.eval_rate(t, {5.0}) == doctest::Approx(m.params.at("rho")));
    }
  }
  CHECK(found);
}

TEST_CASE("unknown builtin and bad file raise the right errors") {
  CHECK_THROWS_AS(builtin_model("no_such_model"), ValidationError);
  CHECK_THROWS_AS(load_model_file("/nonexistent/path.json"), IoError);
  CHECK_THROWS_AS(parse_model_json("{ not json"), ValidationError);
  CHECK_THROWS_AS(parse_model_json("{}"), ValidationError);
}

TEST_CASE("validation flags a transition that exits the space") {
  // unit death at the lower end of [0, inf): jumps to -1/n with rate 1
  ModelSpec m("leaky", interval(0.0, kInf));
  TransitionSpec t;
  t.gamma = {-1};
  t.rate = Expr::parse("1");
  t.kind = TransitionKind::interaction;
  m.transitions.push_back(t);
  ValidationReport rep = validate_model(m, 2000, 8.0);
  CHECK_FALSE(rep.ok);
  bool fatal = false;
  for (const auto& issue : rep.issues) fatal = fatal || issue.fatal;
  CHECK(fatal);
}

TEST_CASE("validation accepts a rate that vanishes at the exit face") {
  ModelSpec m("absorbing", interval(0.0, kInf));
  TransitionSpec t;
  t.gamma = {-1};
  t.rate = Expr::parse("x1");
  t.kind = TransitionKind::interaction;
  m.transitions.push_back(t);
  ValidationReport rep = validate_model(m, 2000, 8.0);
  CHECK(rep.ok);
}

TEST_CASE("kind names round-trip") {
  for (TransitionKind k :
       {TransitionKind::interaction, TransitionKind::immigration,
        TransitionKind::harvesting}) {
    CHECK(transition_kind_from_string(to_string(k)) == k);
  }
}
