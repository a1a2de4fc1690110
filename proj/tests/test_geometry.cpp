#include <cmath>

#include "doctest.h"
#include "ldlab/geometry.hpp"

using namespace ldlab;

TEST_CASE("interval membership and active faces") {
  Polyhedron E = interval(0.0, 2.0);
  CHECK(E.dim() == 1);
  CHECK(E.contains({0.0}));
  CHECK(E.contains({1.0}));
  CHECK(E.contains({2.0}));
  CHECK_FALSE(E.contains({-0.1}));
  CHECK_FALSE(E.contains({2.1}));
  CHECK(E.active_set({0.0}) == FaceIndex{0});
  CHECK(E.active_set({2.0}) == FaceIndex{1});
  CHECK(E.active_set({1.0}).empty());
}

TEST_CASE("half line has a single closed face") {
  Polyhedron E = interval(0.0, kInf);
  CHECK(E.closed_faces().size() == 1);
  CHECK(E.contains({1e9}));
  CHECK(E.active_set({0.0}) == FaceIndex{0});
}

TEST_CASE("orthant active set at a corner") {
  Polyhedron E = orthant(3);
  CHECK(E.contains({0.0, 0.0, 0.0}));
  CHECK(E.active_set({0.0, 0.0, 0.0}) == FaceIndex{0, 1, 2});
  CHECK(E.active_set({0.0, 1.0, 0.0}) == FaceIndex{0, 2});
  CHECK(E.active_set({1.0, 1.0, 1.0}).empty());
}

TEST_CASE("tangent cone at boundaries") {
  Polyhedron E = interval(0.0, kInf);
  CHECK(E.tangent_cone_contains({0.0}, {1.0}));
  CHECK_FALSE(E.tangent_cone_contains({0.0}, {-1.0}));
  CHECK(E.tangent_cone_contains({1.0}, {-1.0}));  // interior: all directions
  Vec proj = E.project_tangent({0.0}, {-3.0});
  CHECK(proj[0] == doctest::Approx(0.0));
  proj = E.project_tangent({0.0}, {3.0});
  CHECK(proj[0] == doctest::Approx(3.0));
}

TEST_CASE("orthant tangent projection is componentwise at a corner") {
  Polyhedron E = orthant(2);
  Vec proj = E.project_tangent({0.0, 0.0}, {-1.0, 2.0});
  CHECK(proj[0] == doctest::Approx(0.0));
  CHECK(proj[1] == doctest::Approx(2.0));
}

TEST_CASE("point projection repairs infeasible points") {
  Polyhedron E = interval(0.0, 2.0);
  CHECK(E.project_point({-1.0})[0] == doctest::Approx(0.0));
  CHECK(E.project_point({3.0})[0] == doctest::Approx(2.0));
  CHECK(E.project_point({1.5})[0] == doctest::Approx(1.5));
  for (double x : {-5.0, -0.001, 0.5, 1.999, 7.0})
    CHECK(E.contains(E.project_point({x})));
}

TEST_CASE("open faces reject their boundary and never activate") {
  // upper bound open at 1, closed at 0: the SI-type unit interval
  Polyhedron E(1, {HalfSpace({0.0}, {1.0}, true)},
               {HalfSpace({1.0}, {-1.0}, false)}, {0.5});
  CHECK(E.contains({0.0}));
  CHECK_FALSE(E.contains({1.0}));
  CHECK(E.contains({0.999}));
  CHECK(E.active_set({0.999}).empty());
  Vec repaired = E.project_point({1.7});
  CHECK(E.contains(repaired));
  CHECK(repaired[0] < 1.0);
}

TEST_CASE("witness must be interior") {
  CHECK_THROWS_AS(
      Polyhedron(1, {HalfSpace({0.0}, {1.0}, true)}, {}, {-1.0}),
      ValidationError);
  CHECK_THROWS_AS(
      Polyhedron(1, {HalfSpace({0.0}, {1.0}, true)}, {}, {0.0}),
      ValidationError);
}

TEST_CASE("normals are unit length after construction") {
  HalfSpace h({0.0, 0.0}, {3.0, 4.0}, true);
  CHECK(norm2(h.normal) == doctest::Approx(1.0));
  CHECK(h.margin({3.0, 4.0}) == doctest::Approx(5.0));
}
