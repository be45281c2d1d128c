#include "faithsum/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace faithsum {

namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// per-language rows in input order, then one average row per system when
// several languages are present
std::vector<EvalRow> with_averages(const std::vector<EvalRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("report: no results");
    std::set<std::string> languages;
    for (const EvalRow& row : rows) languages.insert(row.language);
    std::vector<EvalRow> out = rows;
    if (languages.size() < 2) return out;

    std::vector<std::string> system_order;
    std::map<std::string, std::vector<const EvalRow*>> by_system;
    for (const EvalRow& row : rows) {
        if (by_system.find(row.system) == by_system.end()) system_order.push_back(row.system);
        by_system[row.system].push_back(&row);
    }
    for (const std::string& system : system_order) {
        EvalRow avg;
        avg.system = system;
        avg.language = "avg";
        const auto& group = by_system[system];
        for (const EvalRow* row : group) {
            avg.rouge1 += row->rouge1;
            avg.rouge2 += row->rouge2;
            avg.rouge_l += row->rouge_l;
            avg.faithfulness += row->faithfulness;
            avg.novel_bi += row->novel_bi;
            avg.novel_tri += row->novel_tri;
        }
        const auto n = static_cast<double>(group.size());
        avg.rouge1 /= n;
        avg.rouge2 /= n;
        avg.rouge_l /= n;
        avg.faithfulness /= n;
        avg.novel_bi /= n;
        avg.novel_tri /= n;
        out.push_back(avg);
    }
    return out;
}

std::vector<std::vector<std::string>> cells(const std::vector<EvalRow>& rows,
                                            const std::string& faith_label) {
    std::vector<std::vector<std::string>> table;
    table.push_back({"system", "lang", "R-1", "R-2", "R-L", faith_label, "bi%", "tri%"});
    for (const EvalRow& row : rows) {
        table.push_back({row.system, row.language, fixed2(row.rouge1), fixed2(row.rouge2),
                         fixed2(row.rouge_l), fixed2(row.faithfulness),
                         fixed2(row.novel_bi), fixed2(row.novel_tri)});
    }
    return table;
}

}  // namespace

std::string render_report_tsv(const std::vector<EvalRow>& rows,
                              const std::string& faith_label) {
    std::ostringstream out;
    for (const auto& row : cells(with_averages(rows), faith_label)) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << '\t';
            out << row[i];
        }
        out << '\n';
    }
    return out.str();
}

std::string render_report_text(const std::vector<EvalRow>& rows,
                               const std::string& faith_label) {
    const auto table = cells(with_averages(rows), faith_label);
    std::vector<std::size_t> widths(table.front().size(), 0);
    for (const auto& row : table) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            widths[i] = std::max(widths[i], row[i].size());
        }
    }
    std::ostringstream out;
    for (const auto& row : table) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << "  ";
            out << row[i];
            for (std::size_t pad = row[i].size(); pad < widths[i]; ++pad) out << ' ';
        }
        out << '\n';
    }
    return out.str();
}

void emit_report(const std::vector<EvalRow>& rows, const std::string& faith_label,
                 const std::string& tsv_path, const std::string& txt_path) {
    const std::string tsv = render_report_tsv(rows, faith_label);
    const std::string txt = render_report_text(rows, faith_label);
    std::ofstream tsv_out(tsv_path, std::ios::binary);
    if (!tsv_out) throw std::runtime_error("cannot write report: " + tsv_path);
    tsv_out << tsv;
    std::ofstream txt_out(txt_path, std::ios::binary);
    if (!txt_out) throw std::runtime_error("cannot write report: " + txt_path);
    txt_out << txt;
}

}  // namespace faithsum
