#include "dune/render.hpp"

#include <sstream>
#include <stdexcept>

namespace dune {

std::string render_rows(const std::vector<TraceRow>& rows) {
    std::ostringstream out;
    for (const auto& r : rows) {
        out << r.demon << '\t' << to_string(r.state) << '\t' << r.conf << '\t' << r.old << '\t' << r.death << '\t'
            << r.accp << '\t' << r.rejct << '\t' << r.fnum << '\t' << r.react << '\t' << r.or_bns << '\n';
    }
    return out.str();
}

std::string render_step_table(const StepReport& report) {
    return std::string(kTableHeader) + '\n' + render_rows(report.rows);
}

std::string render_accept(const Event& event) {
    return "output from demon " + event.subject + ": " + event.text + "\n";
}

std::string render_paper_step(const StepReport& report) {
    std::string out = "input" + std::to_string(report.fnum) + ": " + report.feature.str() + "\n";
    out += render_step_table(report);
    for (const auto& e : report.events) {
        if (e.kind == EventKind::accept) out += render_accept(e);
    }
    return out;
}

std::string render_summary_matrix(const SummaryMatrix& matrix) {
    std::ostringstream out;
    for (std::size_t d = 0; d < matrix.demons.size(); ++d) {
        out << matrix.demons[d];
        for (int v : matrix.cells[d]) out << '\t' << v;
        out << '\n';
    }
    return out.str();
}

std::string render_replay(const Session& session, std::string_view format) {
    std::string out;
    if (format == "paper") {
        for (const auto& report : session.log()) out += render_paper_step(report) + "\n";
        out += render_summary_matrix(session.matrix());
    } else if (format == "tsv") {
        out += std::string("INPUT\tFEATURE\t") + kTableHeader + "\n";
        for (const auto& report : session.log()) {
            std::istringstream rows(render_rows(report.rows));
            for (std::string line; std::getline(rows, line);) {
                out += std::to_string(report.fnum) + '\t' + report.feature.str() + '\t' + line + '\n';
            }
        }
        out += "\n" + render_summary_matrix(session.matrix());
    } else if (format == "jsonl") {
        for (const auto& report : session.log()) out += log_line(report) + "\n";
    } else {
        throw std::invalid_argument("unknown format '" + std::string(format) + "'");
    }
    return out;
}

}  // namespace dune
