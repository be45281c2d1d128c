#include "faithsum/params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "faithsum/kernels.hpp"

namespace faithsum {

std::size_t Layout::add(const std::string& name, std::size_t rows, std::size_t cols,
                        bool trainable) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("layout: tensor \"" + name + "\" has a zero dimension");
    }
    if (!index_.emplace(name, tensors_.size()).second) {
        throw std::invalid_argument("layout: duplicate tensor name \"" + name + "\"");
    }
    TensorSpec spec{name, total_, rows, cols, trainable};
    total_ += spec.size();
    tensors_.push_back(std::move(spec));
    return tensors_.back().offset;
}

const TensorSpec& Layout::at(const std::string& name) const {
    const TensorSpec* spec = find(name);
    if (spec == nullptr) throw std::invalid_argument("layout: unknown tensor \"" + name + "\"");
    return *spec;
}

const TensorSpec* Layout::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &tensors_[it->second];
}

void Layout::set_trainable(const std::string& prefix, bool trainable) {
    for (TensorSpec& spec : tensors_) {
        if (spec.name.rfind(prefix, 0) == 0) spec.trainable = trainable;
    }
}

bool Layout::compatible(const Layout& other) const {
    if (this == &other) return true;
    if (tensors_.size() != other.tensors_.size() || total_ != other.total_) return false;
    for (std::size_t i = 0; i < tensors_.size(); ++i) {
        const TensorSpec& a = tensors_[i];
        const TensorSpec& b = other.tensors_[i];
        if (a.name != b.name || a.offset != b.offset || a.rows != b.rows || a.cols != b.cols) {
            return false;
        }
    }
    return true;
}

ParamVector ParamVector::zeros(LayoutPtr layout) {
    ParamVector pv;
    pv.values.assign(layout->total_size(), 0.0);
    pv.layout = std::move(layout);
    return pv;
}

double* ParamVector::tensor(const std::string& name) {
    return values.data() + layout->at(name).offset;
}

const double* ParamVector::tensor(const std::string& name) const {
    return values.data() + layout->at(name).offset;
}

double ParamVector::norm2() const {
    return std::sqrt(kernels::dot(values.data(), values.data(), values.size()));
}

namespace {

void require_compatible(const ParamVector& a, const ParamVector& b, const char* op) {
    if (!a.layout || !b.layout || !a.layout->compatible(*b.layout)) {
        throw std::invalid_argument(std::string(op) + ": parameter layouts do not match");
    }
}

}  // namespace

ParamVector param_arith(const ParamVector& a, const ParamVector& b, double alpha,
                        double beta) {
    require_compatible(a, b, "param_arith");
    ParamVector out;
    out.layout = a.layout;
    out.values.resize(a.values.size());
    kernels::affine(alpha, a.values.data(), beta, b.values.data(), out.values.data(),
                    out.values.size());
    return out;
}

void param_axpy(double alpha, const ParamVector& x, ParamVector& y) {
    require_compatible(x, y, "param_axpy");
    kernels::axpy(alpha, x.values.data(), y.values.data(), y.values.size());
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << "FSCKPT1\n";
    out << "kind " << ckpt.kind << "\n";
    for (const auto& [key, value] : ckpt.config) {
        out << "config " << key << " " << value << "\n";
    }
    out << "vocab " << ckpt.vocab_tokens.size() << "\n";
    for (const std::string& tok : ckpt.vocab_tokens) out << tok << "\n";
    const auto& tensors = ckpt.params.layout->tensors();
    out << "tensors " << tensors.size() << "\n";
    for (const TensorSpec& t : tensors) {
        out << t.name << " " << t.rows << " " << t.cols << " " << (t.trainable ? 1 : 0)
            << "\n";
    }
    out << "values " << ckpt.params.values.size() << "\n";
    out.write(reinterpret_cast<const char*>(ckpt.params.values.data()),
              static_cast<std::streamsize>(ckpt.params.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string line;
    auto next_line = [&]() {
        if (!std::getline(in, line)) {
            throw std::runtime_error("truncated checkpoint: " + path);
        }
        return line;
    };
    if (next_line() != "FSCKPT1") {
        throw std::runtime_error("not a checkpoint file: " + path);
    }
    Checkpoint ckpt;
    next_line();
    if (line.rfind("kind ", 0) != 0) throw std::runtime_error("checkpoint missing kind: " + path);
    ckpt.kind = line.substr(5);

    while (std::getline(in, line) && line.rfind("config ", 0) == 0) {
        std::istringstream ls(line.substr(7));
        std::string key;
        ls >> key;
        std::string value;
        std::getline(ls, value);
        if (!value.empty() && value.front() == ' ') value.erase(0, 1);
        ckpt.config[key] = value;
    }
    if (line.rfind("vocab ", 0) != 0) throw std::runtime_error("checkpoint missing vocab: " + path);
    const std::size_t vocab_n = std::stoull(line.substr(6));
    ckpt.vocab_tokens.reserve(vocab_n);
    for (std::size_t i = 0; i < vocab_n; ++i) ckpt.vocab_tokens.push_back(next_line());

    next_line();
    if (line.rfind("tensors ", 0) != 0) {
        throw std::runtime_error("checkpoint missing tensor table: " + path);
    }
    const std::size_t tensor_n = std::stoull(line.substr(8));
    auto layout = std::make_shared<Layout>();
    for (std::size_t i = 0; i < tensor_n; ++i) {
        std::istringstream ls(next_line());
        std::string name;
        std::size_t rows = 0;
        std::size_t cols = 0;
        int trainable = 1;
        if (!(ls >> name >> rows >> cols >> trainable)) {
            throw std::runtime_error("bad tensor line in checkpoint: " + path);
        }
        layout->add(name, rows, cols, trainable != 0);
    }

    next_line();
    if (line.rfind("values ", 0) != 0) {
        throw std::runtime_error("checkpoint missing values: " + path);
    }
    const std::size_t value_n = std::stoull(line.substr(7));
    if (value_n != layout->total_size()) {
        throw std::runtime_error("checkpoint value count does not match layout: " + path);
    }
    ckpt.params.layout = layout;
    ckpt.params.values.resize(value_n);
    in.read(reinterpret_cast<char*>(ckpt.params.values.data()),
            static_cast<std::streamsize>(value_n * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(value_n * sizeof(double))) {
        throw std::runtime_error("truncated checkpoint values: " + path);
    }
    return ckpt;
}

}  // namespace faithsum
