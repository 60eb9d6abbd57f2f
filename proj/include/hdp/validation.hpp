#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdp/conjugate.hpp"

namespace hdp {

enum class Grid { Quick, Full };

struct CheckLine {
    std::string name;
    double expected = 0.0;
    double got = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Structured validation output: one line per check.
class ValidationReport {
 public:
    void add(std::string name, double expected, double got, double tolerance, bool pass);
    /// |got / expected - 1| <= tol, with both values given in log domain.
    void add_relative_log(std::string name, double log_expected, double log_got, double tol);
    void add_absolute(std::string name, double expected, double got, double tol);
    void append(const ValidationReport& other);

    bool all_passed() const;
    std::size_t size() const { return lines_.size(); }
    std::size_t failures() const;
    const std::vector<CheckLine>& lines() const { return lines_; }
    void print(std::ostream& os) const;

 private:
    std::vector<CheckLine> lines_;
};

struct GpCase {
    GammaPoissonParams prior;
    std::vector<std::int64_t> conditioning;
    std::int64_t query = 0;
};

struct NgCase {
    NormalGammaParams prior;
    std::vector<double> conditioning;
    double query = 0.0;
};

std::vector<GpCase> gp_validation_grid(Grid grid);
std::vector<NgCase> ng_validation_grid(Grid grid);

ValidationReport validate_gp_quadrature(Grid grid);
ValidationReport validate_ng_quadrature(Grid grid);
ValidationReport validate_nb_normalization(Grid grid);
ValidationReport validate_t_normalization(Grid grid);
ValidationReport validate_block_agreement(Grid grid);
ValidationReport validate_exact_enumeration();

/// Σ_x exp(gp_log_pred_one(post, x)), summed until a geometric bound on the
/// remaining tail falls below `tail_tol`.
double nb_total_mass(const GammaPoissonParams& post, double tail_tol = 1e-10);

/// ∫ exp(ng_log_pred_one(post, x)) dx for d = 1 by quadrature in x = μ + s sinh(u).
double student_t_total_mass(const NormalGammaParams& post);

/// All of the above.
ValidationReport run_validation(Grid grid);

}  // namespace hdp
