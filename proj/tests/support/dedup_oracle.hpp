#pragma once

// Brute-force near-duplicate clustering used as an oracle for find_duplicates.

#include <random>
#include <vector>

#include "ontoforge/tripleparse.hpp"
#include "ontoforge/validate.hpp"

namespace testing_support {

/// `n` candidates from one transcript (line numbers 1..n) over a small
/// vocabulary of lowercase words and two relation spellings, so that
/// near-duplicates are common.
std::vector<ontoforge::CandidateTriple> random_candidates(std::mt19937& rng, std::size_t n);

/// Jaccard over space-separated word sets, computed independently.
double word_jaccard(const std::string& a, const std::string& b);

/// Connected components (size >= 2) by breadth-first search over all pairs,
/// members in input order, components ordered by first member.
std::vector<ontoforge::Cluster> cluster_oracle(const std::vector<ontoforge::CandidateTriple>& triples,
                                               double threshold);

}  // namespace testing_support
