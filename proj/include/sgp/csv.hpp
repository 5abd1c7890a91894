#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgp/config.hpp"

namespace sgp {

// CSV writer: header row, '.' decimal, shortest-exact doubles, no locale.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }

    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) out_ << ',';
            out_ << cols[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_double(vals[i]);
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

// Coefficient-vector dump, `n,coeff` per row.
inline void dump_coefficients_csv(const std::string& path,
                                  const std::vector<double>& coeffs) {
    CsvWriter w(path);
    w.header({"n", "coeff"});
    for (std::size_t n = 0; n < coeffs.size(); ++n)
        w.row({static_cast<double>(n), coeffs[n]});
}

} // namespace sgp
