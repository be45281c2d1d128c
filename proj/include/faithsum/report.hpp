#pragma once

#include <string>
#include <vector>

namespace faithsum {

struct EvalRow {
    std::string system;
    std::string language;
    double rouge1 = 0.0;
    double rouge2 = 0.0;
    double rouge_l = 0.0;
    double faithfulness = 0.0;
    double novel_bi = 0.0;
    double novel_tri = 0.0;
};

// Renders per-language rows plus one average row per system (when systems
// cover more than one language), as tab-separated and aligned text. Cells
// carry two decimals. Throws on empty input.
std::string render_report_tsv(const std::vector<EvalRow>& rows,
                              const std::string& faith_label);
std::string render_report_text(const std::vector<EvalRow>& rows,
                               const std::string& faith_label);

void emit_report(const std::vector<EvalRow>& rows, const std::string& faith_label,
                 const std::string& tsv_path, const std::string& txt_path);

}  // namespace faithsum
