#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <span>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"

namespace wavesem {

/// Compressed sparse row matrix with sorted, unique column indices per row.
struct CsrMatrix {
    int rows = 0;
    int cols = 0;
    bool symmetric = false;
    std::vector<int> row_ptr{0};
    std::vector<int> col_idx;
    std::vector<double> values;

    std::size_t nnz() const { return col_idx.size(); }

    /// Position of (i, j) in `values`, or -1.
    int find(int i, int j) const
    {
        const auto b = col_idx.begin() + row_ptr[static_cast<std::size_t>(i)];
        const auto e = col_idx.begin() + row_ptr[static_cast<std::size_t>(i) + 1];
        const auto it = std::lower_bound(b, e, j);
        return (it != e && *it == j) ? static_cast<int>(it - col_idx.begin()) : -1;
    }

    double at(int i, int j) const
    {
        const int k = find(i, j);
        return k < 0 ? 0.0 : values[static_cast<std::size_t>(k)];
    }

    std::vector<double> diagonal() const
    {
        std::vector<double> d(static_cast<std::size_t>(rows), 0.0);
        for (int i = 0; i < rows; ++i) {
            d[static_cast<std::size_t>(i)] = at(i, i);
        }
        return d;
    }

    /// y = A x, parallel over rows; each row sums in column order.
    void multiply(std::span<const double> x, std::span<double> y) const
    {
        parallel_for(rows, [&](std::ptrdiff_t i) {
            double s = 0.0;
            for (int k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
                s += values[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col_idx[static_cast<std::size_t>(k)])];
            }
            y[static_cast<std::size_t>(i)] = s;
        });
    }

    std::vector<double> operator*(std::span<const double> x) const
    {
        std::vector<double> y(static_cast<std::size_t>(rows));
        multiply(x, y);
        return y;
    }
};

/// Build a CSR pattern (values zeroed) from per-row column lists.
inline CsrMatrix csr_from_rows(int rows, int cols, std::vector<std::vector<int>> row_cols)
{
    CsrMatrix A;
    A.rows = rows;
    A.cols = cols;
    A.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
    for (int i = 0; i < rows; ++i) {
        auto& r = row_cols[static_cast<std::size_t>(i)];
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        A.row_ptr[static_cast<std::size_t>(i) + 1] = A.row_ptr[static_cast<std::size_t>(i)] + static_cast<int>(r.size());
    }
    A.col_idx.reserve(static_cast<std::size_t>(A.row_ptr.back()));
    for (const auto& r : row_cols) {
        A.col_idx.insert(A.col_idx.end(), r.begin(), r.end());
    }
    A.values.assign(A.col_idx.size(), 0.0);
    return A;
}

struct Triplet {
    int row;
    int col;
    double value;
};

/// Sum duplicate triplets into a CSR matrix (summation in input order).
inline CsrMatrix csr_from_triplets(int rows, int cols, const std::vector<Triplet>& t)
{
    std::vector<std::vector<int>> rc(static_cast<std::size_t>(rows));
    for (const auto& e : t) {
        rc[static_cast<std::size_t>(e.row)].push_back(e.col);
    }
    CsrMatrix A = csr_from_rows(rows, cols, std::move(rc));
    for (const auto& e : t) {
        A.values[static_cast<std::size_t>(A.find(e.row, e.col))] += e.value;
    }
    return A;
}

/// max |A_ij - A_ji| / max |A_ij| over stored entries.
inline double symmetry_defect(const CsrMatrix& A)
{
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i < A.rows; ++i) {
        for (int k = A.row_ptr[static_cast<std::size_t>(i)]; k < A.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            const int j = A.col_idx[static_cast<std::size_t>(k)];
            const double v = A.values[static_cast<std::size_t>(k)];
            num = std::max(num, std::abs(v - A.at(j, i)));
            den = std::max(den, std::abs(v));
        }
    }
    return den > 0.0 ? num / den : 0.0;
}

/// Coordinate-list dump: one "row col value" line per stored entry.
inline void write_coo(std::ostream& os, const CsrMatrix& A)
{
    os << "% rows " << A.rows << " cols " << A.cols << " nnz " << A.nnz() << '\n' << std::setprecision(17);
    for (int i = 0; i < A.rows; ++i) {
        for (int k = A.row_ptr[static_cast<std::size_t>(i)]; k < A.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            os << i << ' ' << A.col_idx[static_cast<std::size_t>(k)] << ' ' << A.values[static_cast<std::size_t>(k)]
               << '\n';
        }
    }
}

} // namespace wavesem
