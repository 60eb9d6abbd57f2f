#include "hdp/sampler.hpp"

#include <map>

namespace hdp {

void SamplerConfig::validate() const {
    if (sweeps < 1) throw Error("sweeps must be >= 1");
    if (burn_in < 0 || burn_in >= sweeps) throw Error("burn_in must be in [0, sweeps)");
    if (snapshot_every < 0) throw Error("snapshot_every must be >= 0");
}

int ChainTrace::modal_num_dishes() const {
    std::map<int, int> freq;
    for (std::size_t s = static_cast<std::size_t>(burn_in); s < num_dishes.size(); ++s) ++freq[num_dishes[s]];
    int best = 0;
    int best_count = -1;
    for (const auto& [k, c] : freq) {
        if (c > best_count) {
            best = k;
            best_count = c;
        }
    }
    return best;
}

}  // namespace hdp
