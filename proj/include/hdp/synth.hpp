#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdp/conjugate.hpp"
#include "hdp/dataset.hpp"
#include "hdp/random.hpp"
#include "hdp/seating.hpp"

namespace hdp {

/// A franchise seating drawn from the prior.
struct CrfSeating {
    std::vector<std::vector<int>> table_of;       // [j][i]
    std::vector<std::vector<int>> dish_of_table;  // [j][t]
    int num_dishes = 0;

    int dish_of(std::size_t j, std::size_t i) const { return dish_of_table[j][table_of[j][i]]; }
    int num_tables() const;
};

/// Sequential two-level Polya urn: customer i of group j joins table t with
/// probability n_jt / (i - 1 + alpha0) or opens a table with probability
/// alpha0 / (i - 1 + alpha0); an opened table takes dish k with probability
/// m_.k / (m_.. + gamma) or a new dish with probability gamma / (m_.. + gamma).
CrfSeating sample_crf_seating(double gamma, double alpha0, const std::vector<std::size_t>& group_sizes, Rng& rng);

struct NormalAtom {
    Eigen::VectorXd mean;
    double precision = 1.0;
};

double draw_atom(const GammaPoissonParams& prior, Rng& rng);
NormalAtom draw_atom(const NormalGammaParams& prior, Rng& rng);
std::int64_t draw_observation(double rate, Rng& rng);
Eigen::VectorXd draw_observation(const NormalAtom& atom, Rng& rng);

/// Observations given a seating: one fresh atom per dish from the prior, then
/// every customer drawn from its dish's likelihood.
GroupedDataset sample_data(const GammaPoissonParams& prior, const CrfSeating& seating, Rng& rng,
                           std::vector<double>* atoms = nullptr);
GroupedDataset sample_data(const NormalGammaParams& prior, const CrfSeating& seating, Rng& rng,
                           std::vector<NormalAtom>* atoms = nullptr);

template <class Atom>
struct ForwardSample {
    GroupedDataset data;
    CrfSeating seating;
    std::vector<Atom> atoms;
};

ForwardSample<double> forward_sample(const HdpModel<GammaPoisson>& model,
                                     const std::vector<std::size_t>& group_sizes, Rng& rng);
ForwardSample<NormalAtom> forward_sample(const HdpModel<NormalGamma>& model,
                                         const std::vector<std::size_t>& group_sizes, Rng& rng);

/// Canned dataset with known dish labels.
struct Scenario {
    std::string name;
    GroupedDataset data;
    std::vector<std::vector<int>> true_dish;  // [j][i]
    int num_true_dishes = 0;
};

/// "gp-3rates": Poisson rates 1, 20, 400, three groups of 30.
/// "ng-3means": unit-precision Gaussians in R^2 at (0,0), (5,5), (-5,5),
/// three groups of 30. Group j draws 15/10/5 from the dishes rotated by j.
Scenario fixed_scenario(const std::string& name);
std::vector<std::string> scenario_names();

}  // namespace hdp
