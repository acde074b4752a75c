// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

namespace hypersindy {

// Monomial candidate library up to a total degree. Terms are ordered graded
// lexicographically: total degree ascending, then descending lexicographic on
// exponent vectors, so for three variables the order starts
// 1 (if included), x1, x2, x3, x1^2, x1*x2, x1*x3, x2^2, ...
// The order is canonical: checkpoints and ground-truth placements rely on it.
struct LibrarySpec {
    int state_dim = 0;
    int max_degree = 0;
    bool include_constant = true;

    int term_count() const;
    void validate() const; // ConfigError on bad fields
};

struct Term {
    std::vector<int> exponents; // length state_dim, sum <= max_degree
    int degree() const;
    std::string display() const; // "1", "x2", "x1^2*x3", ...
};

std::vector<Term> build_library(const LibrarySpec& spec);

// Writes the b x l row-major library matrix for b row-major states (b x n).
void evaluate_library(const LibrarySpec& spec, std::span<const double> states, int rows,
                      std::span<double> out);
std::vector<double> evaluate_library(const LibrarySpec& spec, std::span<const double> states,
                                     int rows);

// Canonical position of an exponent vector; inverse of build_library indexing.
int term_index(const LibrarySpec& spec, std::span<const int> exponents);

} // namespace hypersindy
