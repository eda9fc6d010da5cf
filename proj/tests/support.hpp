#pragma once

// Random instances shared by the unit suites.

#include "conslab/generators.hpp"
#include "conslab/rng.hpp"

#include <cstdint>

namespace conslab::fixtures {

inline StreamEngine engine(std::uint64_t seed) { return StreamEngine(StreamKey(seed).derive(StreamTag::test_case)); }

using generate::A1Trace;
using generate::random_A1_trace;
using generate::random_balanced;
using generate::random_digraph;
using generate::random_undirected;
using generate::random_vector;

}  // namespace conslab::fixtures
