#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace faithsum {

struct TensorSpec {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool trainable = true;

    std::size_t size() const { return rows * cols; }
};

// Named-tensor map over one flat buffer. Models built from the same config
// produce identical layouts, which is what makes parameter arithmetic
// between checkpoints meaningful.
class Layout {
public:
    std::size_t add(const std::string& name, std::size_t rows, std::size_t cols,
                    bool trainable = true);

    const TensorSpec& at(const std::string& name) const;
    const TensorSpec* find(const std::string& name) const;
    const std::vector<TensorSpec>& tensors() const { return tensors_; }
    std::size_t total_size() const { return total_; }

    // Marks every tensor whose name starts with prefix ("" = all).
    void set_trainable(const std::string& prefix, bool trainable);

    // Same tensor names, offsets and shapes; trainable flags are training
    // metadata and do not participate.
    bool compatible(const Layout& other) const;

private:
    std::vector<TensorSpec> tensors_;
    std::map<std::string, std::size_t> index_;
    std::size_t total_ = 0;
};

using LayoutPtr = std::shared_ptr<const Layout>;

struct ParamVector {
    LayoutPtr layout;
    std::vector<double> values;

    static ParamVector zeros(LayoutPtr layout);

    double* tensor(const std::string& name);
    const double* tensor(const std::string& name) const;

    std::size_t size() const { return values.size(); }

    double norm2() const;  // Euclidean norm
};

// alpha*a + beta*b, elementwise. Throws on layout mismatch.
ParamVector param_arith(const ParamVector& a, const ParamVector& b, double alpha,
                        double beta);

// In-place y += alpha*x with the same layout check.
void param_axpy(double alpha, const ParamVector& x, ParamVector& y);

// On-disk model container: a text header (kind, config, vocab, layout)
// followed by the raw little-endian doubles. Round-trips bit-exactly.
struct Checkpoint {
    std::string kind;
    std::map<std::string, std::string> config;
    std::vector<std::string> vocab_tokens;
    ParamVector params;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace faithsum
