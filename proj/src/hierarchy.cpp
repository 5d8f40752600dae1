#include "nmm/hierarchy.hpp"

namespace nmm {

std::vector<Index> ProblemHierarchy::dims() const {
    std::vector<Index> d;
    d.reserve(objectives.size());
    for (const auto& f : objectives) {
        d.push_back(f->dim());
    }
    return d;
}

void ProblemHierarchy::validate() const {
    if (objectives.empty()) {
        throw ConfigError("hierarchy '" + name + "': no levels");
    }
    if (transfers.size() + 1 != objectives.size()) {
        throw ConfigError("hierarchy '" + name + "': expected " +
                          std::to_string(objectives.size() - 1) + " transfers, got " +
                          std::to_string(transfers.size()));
    }
    for (std::size_t i = 0; i < objectives.size(); ++i) {
        if (!objectives[i]) {
            throw ConfigError("hierarchy '" + name + "': null objective at level " +
                              std::to_string(i + 1));
        }
    }
    for (std::size_t i = 0; i < transfers.size(); ++i) {
        const auto& t = transfers[i];
        if (t.n_coarse() != objectives[i]->dim() || t.n_fine() != objectives[i + 1]->dim()) {
            throw ConfigError("hierarchy '" + name + "': transfer " + std::to_string(i + 1) +
                              " maps " + std::to_string(t.n_coarse()) + " -> " +
                              std::to_string(t.n_fine()) + " but levels have dims " +
                              std::to_string(objectives[i]->dim()) + " and " +
                              std::to_string(objectives[i + 1]->dim()));
        }
    }
}

} // namespace nmm
