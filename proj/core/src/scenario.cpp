#include "voc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "voc/errors.hpp"

namespace voc {

double default_step(Model model) {
    return model == Model::actual ? kDefaultEmtStep : kDefaultAveragedStep;
}

std::vector<double> Scenario::segment_boundaries() const {
    std::vector<double> b{0.0, duration_s};
    auto add = [&](double t) {
        if (t > 0.0 && t < duration_s) b.push_back(t);
    };
    for (const auto& l : loads) {
        add(l.connect_s);
        add(l.disconnect_s);
    }
    if (dispatch) {
        for (const auto& s : dispatch->schedule) add(s.t_start);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

void Scenario::validate() const {
    if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) {
        throw ConfigError(fmt::format("{}: duration must be finite and >= 0", name));
    }
    if (dt_s < 0.0 || !std::isfinite(dt_s)) {
        throw ConfigError(fmt::format("{}: dt must be positive", name));
    }
    if (!(trace_interval_s > 0.0)) {
        throw ConfigError(fmt::format("{}: trace interval must be positive", name));
    }
    if (inverters.empty() || inverters.size() > 2) {
        throw ConfigError(fmt::format("{}: one or two inverters are supported", name));
    }
    try {
        for (const auto& inv : inverters) {
            inv.params.validate();
            inv.branch.filter.validate();
            inv.branch.line.validate();
        }
        for (const auto& l : loads) l.branch.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("{}: {}", name, e.what()));
    }
    for (const auto& l : loads) {
        if (l.connect_s < 0.0 || !(l.disconnect_s > l.connect_s)) {
            throw ConfigError(fmt::format(
                "{}: load '{}' needs 0 <= connect < disconnect", name, l.branch.label));
        }
        if (l.connect_s > duration_s) {
            throw ConfigError(fmt::format("{}: load '{}' connects after the end of the run",
                                          name, l.branch.label));
        }
    }
    if (dispatch) {
        double last = -1.0;
        for (const auto& s : dispatch->schedule) {
            if (!(s.t_start > last) || s.t_start < 0.0) {
                throw ConfigError(
                    fmt::format("{}: setpoint times must be increasing and >= 0", name));
            }
            last = s.t_start;
        }
        if (!(dispatch->clamp_low > 0.0) || !(dispatch->clamp_high > dispatch->clamp_low)) {
            throw ConfigError(fmt::format("{}: invalid dispatch clamp range", name));
        }
    }
}

const char* to_string(Model model) {
    switch (model) {
        case Model::actual:
            return "actual";
        case Model::averaged:
            return "averaged";
        case Model::legacy:
            return "legacy";
    }
    return "?";
}

Model parse_model(const std::string& text) {
    if (text == "actual") return Model::actual;
    if (text == "averaged") return Model::averaged;
    if (text == "legacy") return Model::legacy;
    throw ConfigError("unknown model '" + text + "' (expected actual, averaged or legacy)");
}

}  // namespace voc
