#include "hdp/dataset.hpp"

#include <numeric>

#include "hdp/numerics.hpp"

namespace hdp {

GroupedDataset GroupedDataset::counts(std::vector<std::vector<std::int64_t>> groups,
                                      std::vector<std::string> names) {
    if (groups.empty()) throw Error("dataset has no groups");
    GroupedDataset data;
    data.kind_ = ObsKind::Count;
    data.dim_ = 1;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        if (groups[j].empty()) throw Error("group " + std::to_string(j) + " is empty");
        for (std::int64_t x : groups[j]) {
            if (x < 0) throw Error("negative count in group " + std::to_string(j));
        }
        data.sizes_.push_back(groups[j].size());
    }
    data.counts_ = std::move(groups);
    data.set_names(std::move(names));
    return data;
}

GroupedDataset GroupedDataset::vectors(std::vector<Eigen::MatrixXd> groups,
                                       std::vector<std::string> names) {
    if (groups.empty()) throw Error("dataset has no groups");
    GroupedDataset data;
    data.kind_ = ObsKind::RealVector;
    data.dim_ = groups.front().rows();
    if (data.dim_ < 1) throw Error("vector observations need dimension >= 1");
    for (std::size_t j = 0; j < groups.size(); ++j) {
        if (groups[j].cols() == 0) throw Error("group " + std::to_string(j) + " is empty");
        if (groups[j].rows() != data.dim_) throw Error("ragged dimension in group " + std::to_string(j));
        if (!groups[j].allFinite()) throw Error("non-finite entry in group " + std::to_string(j));
        data.sizes_.push_back(static_cast<std::size_t>(groups[j].cols()));
    }
    data.vectors_ = std::move(groups);
    data.set_names(std::move(names));
    return data;
}

std::size_t GroupedDataset::total_size() const {
    return std::accumulate(sizes_.begin(), sizes_.end(), std::size_t{0});
}

void GroupedDataset::set_names(std::vector<std::string> names) {
    if (names.empty()) {
        for (std::size_t j = 0; j < sizes_.size(); ++j) names.push_back(std::to_string(j));
    }
    if (names.size() != sizes_.size()) throw Error("group name count does not match group count");
    names_ = std::move(names);
}

}  // namespace hdp
