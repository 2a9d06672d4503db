#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace surfpde {

enum class CheckKind {
    relative,  // |measured - target| <= tol |target|
    absolute,  // |measured - target| <= tol
    below,     // measured < target
    flag,      // pass decided by the caller; detail explains
};

/// One pass/fail line with the measured value it was judged on.
struct CheckRow {
    std::string name;
    CheckKind kind = CheckKind::flag;
    double measured = 0.0;
    double target = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string detail;

    std::string format() const;
};

struct RecipeOptions {
    /// Overrides the recipe's node count when positive.
    int n = 0;
    std::uint64_t seed = 1;
    /// Output directory for coefficient tables and error CSVs; empty disables.
    std::string output_dir;
    /// ex2-surfaces: surfaces to run (default torus).
    std::vector<std::string> surfaces;
    /// Progress lines (equations, timings); may be null.
    std::ostream* log = nullptr;
};

struct RecipeReport {
    std::string recipe;
    std::vector<CheckRow> rows;
    std::vector<std::string> equations;
    double runtime_seconds = 0.0;

    bool passed() const;
};

/// ex1-circle, ex1-sphere, ex1-sqrt, ex2-sphere, ex2-surfaces, ex3-circle,
/// ex3-sphere, ex3-torus, ex4.
const std::vector<std::string>& recipe_names();

/// Runs a named recipe with its documented defaults. Numerical failures inside
/// a recipe become failing rows; an unknown name throws invalid-argument.
RecipeReport run_recipe(const std::string& name, const RecipeOptions& options = {});

}  // namespace surfpde
