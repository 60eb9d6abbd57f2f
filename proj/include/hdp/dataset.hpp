#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hdp {

enum class ObsKind { Count, RealVector };

/// Immutable grouped observations x_{ji}.
///
/// Count data is stored per group as a vector of non-negative integers; real
/// vector data is stored per group as a d x n_j matrix, one observation per
/// column. Groups are dense in [0, num_groups()); group_names() keeps the
/// external key for each index.
class GroupedDataset {
 public:
    static GroupedDataset counts(std::vector<std::vector<std::int64_t>> groups,
                                 std::vector<std::string> names = {});
    static GroupedDataset vectors(std::vector<Eigen::MatrixXd> groups,
                                  std::vector<std::string> names = {});

    ObsKind kind() const { return kind_; }
    Eigen::Index dim() const { return dim_; }
    std::size_t num_groups() const { return sizes_.size(); }
    std::size_t group_size(std::size_t j) const { return sizes_[j]; }
    const std::vector<std::size_t>& group_sizes() const { return sizes_; }
    std::size_t total_size() const;
    const std::vector<std::string>& group_names() const { return names_; }

    std::int64_t count(std::size_t j, std::size_t i) const { return counts_[j][i]; }
    Eigen::MatrixXd::ConstColXpr vector(std::size_t j, std::size_t i) const {
        return vectors_[j].col(static_cast<Eigen::Index>(i));
    }
    const std::vector<std::int64_t>& count_group(std::size_t j) const { return counts_[j]; }
    const Eigen::MatrixXd& vector_group(std::size_t j) const { return vectors_[j]; }

 private:
    GroupedDataset() = default;
    void set_names(std::vector<std::string> names);

    ObsKind kind_ = ObsKind::Count;
    Eigen::Index dim_ = 1;
    std::vector<std::size_t> sizes_;
    std::vector<std::string> names_;
    std::vector<std::vector<std::int64_t>> counts_;
    std::vector<Eigen::MatrixXd> vectors_;
};

}  // namespace hdp
