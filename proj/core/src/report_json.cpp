#include "report_json.hpp"

#include <stdexcept>

namespace dune::detail {

ordered_json to_json(const TraceRow& r) {
    return ordered_json{
        {"demon", r.demon}, {"state", to_string(r.state)}, {"conf", r.conf},   {"old", r.old},
        {"death", r.death}, {"accp", r.accp},               {"rejct", r.rejct}, {"fnum", r.fnum},
        {"react", r.react}, {"or_bns", r.or_bns},
    };
}

ordered_json to_json(const Event& e) {
    ordered_json j{{"type", to_string(e.kind)}};
    if (e.kind == EventKind::unknown_feature) {
        j["feature"] = e.subject;
    } else {
        j["demon"] = e.subject;
    }
    if (e.kind == EventKind::accept) j["output"] = e.text;
    return j;
}

ordered_json rows_to_json(const std::vector<TraceRow>& rows) {
    auto out = ordered_json::array();
    for (const auto& r : rows) out.push_back(to_json(r));
    return out;
}

ordered_json to_json(const StepReport& report) {
    ordered_json j;
    j["fnum"] = report.fnum;
    j["feature"] = report.feature.str();
    j["rows"] = rows_to_json(report.rows);
    j["events"] = ordered_json::array();
    for (const auto& e : report.events) j["events"].push_back(to_json(e));
    return j;
}

StepReport report_from_json(const ordered_json& j) {
    StepReport report;
    report.fnum = j.at("fnum").get<int>();
    report.feature = FeatureId(j.at("feature").get<std::string>());
    for (const auto& r : j.at("rows")) {
        auto state = status_from_string(r.at("state").get<std::string>());
        if (!state) throw std::invalid_argument("unknown state " + r.at("state").dump());
        report.rows.push_back(TraceRow{
            .demon = r.at("demon").get<std::string>(),
            .state = *state,
            .conf = r.at("conf").get<int>(),
            .old = r.at("old").get<int>(),
            .death = r.at("death").get<int>(),
            .accp = r.at("accp").get<int>(),
            .rejct = r.at("rejct").get<int>(),
            .fnum = r.at("fnum").get<int>(),
            .react = r.at("react").get<int>(),
            .or_bns = r.at("or_bns").get<int>(),
        });
    }
    for (const auto& e : j.at("events")) {
        auto kind = event_kind_from_string(e.at("type").get<std::string>());
        if (!kind) throw std::invalid_argument("unknown event type " + e.at("type").dump());
        Event event{*kind, {}, {}};
        event.subject = e.at(*kind == EventKind::unknown_feature ? "feature" : "demon").get<std::string>();
        if (*kind == EventKind::accept) event.text = e.at("output").get<std::string>();
        report.events.push_back(std::move(event));
    }
    return report;
}

}  // namespace dune::detail
