#include "realhom/homology.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace realhom {

namespace {

// Index of a sorted (k-1)-tuple within the flat lex-ordered simplex array,
// or -1 if absent.
index_t find_tuple(const std::vector<std::int32_t>& flat, int stride,
                   const std::int32_t* tuple) {
    const index_t n = static_cast<index_t>(flat.size()) / stride;
    index_t lo = 0, hi = n;
    while (lo < hi) {
        index_t mid = lo + (hi - lo) / 2;
        const std::int32_t* t = flat.data() + mid * stride;
        int cmp = 0;
        for (int i = 0; i < stride; ++i) {
            if (t[i] != tuple[i]) {
                cmp = t[i] < tuple[i] ? -1 : 1;
                break;
            }
        }
        if (cmp < 0)
            lo = mid + 1;
        else
            hi = mid;
    }
    if (lo < n) {
        const std::int32_t* t = flat.data() + lo * stride;
        if (std::equal(t, t + stride, tuple)) return lo;
    }
    return -1;
}

// Sparse integer matrix with row storage plus a column-to-rows pattern index,
// supporting the unimodular row operations used during elimination.
struct SparseMat {
    index_t nrows, ncols;
    std::vector<std::map<std::int32_t, mpz_class>> rows;
    std::vector<std::set<std::int32_t>> col_rows;

    SparseMat(index_t r, index_t c)
        : nrows(r), ncols(c), rows(static_cast<std::size_t>(r)),
          col_rows(static_cast<std::size_t>(c)) {}

    void set_initial(std::int32_t i, std::int32_t j, long long v) {
        if (v == 0) return;
        rows[i][j] = static_cast<long>(v);
        col_rows[j].insert(i);
    }

    // row[k] += c * row[i]
    void row_axpy(std::int32_t k, const mpz_class& c, std::int32_t i) {
        for (const auto& [j, v] : rows[i]) {
            auto it = rows[k].find(j);
            if (it == rows[k].end()) {
                mpz_class nv = c * v;
                if (nv != 0) {
                    rows[k].emplace(j, std::move(nv));
                    col_rows[j].insert(k);
                }
            } else {
                it->second += c * v;
                if (it->second == 0) {
                    rows[k].erase(it);
                    col_rows[j].erase(k);
                }
            }
        }
    }

    void clear_row(std::int32_t i) {
        for (const auto& [j, v] : rows[i]) col_rows[j].erase(i);
        rows[i].clear();
    }
};

// Eliminate with unit pivots only (no fill in the pivot row/column beyond the
// row operations); returns the number of pivots taken. On return no remaining
// entry has magnitude 1.
index_t unit_pivot_phase(SparseMat& m) {
    index_t pivots = 0;
    // rows ordered by current size; sizes go stale, so revalidate on pop
    auto row_size = [&](std::int32_t i) { return m.rows[i].size(); };
    std::set<std::pair<std::size_t, std::int32_t>> queue;
    std::vector<std::size_t> queued_size(m.nrows, 0);
    for (std::int32_t i = 0; i < m.nrows; ++i)
        if (!m.rows[i].empty()) {
            queue.insert({row_size(i), i});
            queued_size[i] = row_size(i);
        }
    auto requeue = [&](std::int32_t i) {
        queue.erase({queued_size[i], i});
        if (!m.rows[i].empty()) {
            queued_size[i] = row_size(i);
            queue.insert({queued_size[i], i});
        }
    };

    std::vector<std::int32_t> deferred;
    while (!queue.empty()) {
        auto [sz, i] = *queue.begin();
        if (m.rows[i].empty() || row_size(i) != sz) {
            queue.erase(queue.begin());
            if (!m.rows[i].empty()) {
                queued_size[i] = row_size(i);
                queue.insert({queued_size[i], i});
            }
            continue;
        }
        // unit entry with fewest column neighbors
        std::int32_t pj = -1;
        std::size_t best = 0;
        int psign = 0;
        for (const auto& [j, v] : m.rows[i]) {
            if (v == 1 || v == -1) {
                std::size_t cs = m.col_rows[j].size();
                if (pj < 0 || cs < best) {
                    pj = j;
                    best = cs;
                    psign = (v > 0) ? 1 : -1;
                }
            }
        }
        queue.erase(queue.begin());
        if (pj < 0) {
            deferred.push_back(i);  // no unit entry; retry after other pivots
            continue;
        }
        // clear column pj via row ops, then drop the pivot row entirely
        std::vector<std::int32_t> targets(m.col_rows[pj].begin(), m.col_rows[pj].end());
        for (std::int32_t k : targets) {
            if (k == i) continue;
            mpz_class c = -m.rows[k][pj] * psign;
            m.row_axpy(k, c, i);
            requeue(k);
        }
        m.clear_row(i);
        ++pivots;
        // deferred rows may have gained unit entries through the updates
        if (!deferred.empty()) {
            for (std::int32_t r : deferred)
                if (!m.rows[r].empty()) {
                    queued_size[r] = row_size(r);
                    queue.insert({queued_size[r], r});
                }
            deferred.clear();
        }
    }
    // final sweep: queue heuristics can strand rows, so loop until stable
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::int32_t i = 0; i < m.nrows; ++i) {
            std::int32_t pj = -1;
            int psign = 0;
            for (const auto& [j, v] : m.rows[i])
                if (v == 1 || v == -1) {
                    pj = j;
                    psign = (v > 0) ? 1 : -1;
                    break;
                }
            if (pj < 0) continue;
            std::vector<std::int32_t> targets(m.col_rows[pj].begin(), m.col_rows[pj].end());
            for (std::int32_t k : targets) {
                if (k == i) continue;
                mpz_class c = -m.rows[k][pj] * psign;
                m.row_axpy(k, c, i);
            }
            m.clear_row(i);
            ++pivots;
            changed = true;
        }
    }
    return pivots;
}

// Textbook Smith reduction on a small dense remainder, minimum-magnitude
// pivoting, enforcing that each pivot divides every remaining entry.
std::vector<mpz_class> dense_snf(std::vector<std::vector<mpz_class>> a) {
    const int R = static_cast<int>(a.size());
    const int C = R ? static_cast<int>(a[0].size()) : 0;
    std::vector<mpz_class> diag;
    int t = 0;
    while (t < R && t < C) {
        int pi = -1, pj = -1;
        mpz_class best_abs;
        for (int i = t; i < R; ++i)
            for (int j = t; j < C; ++j)
                if (a[i][j] != 0) {
                    mpz_class av = abs(a[i][j]);
                    if (pi < 0 || av < best_abs) {
                        pi = i;
                        pj = j;
                        best_abs = av;
                    }
                }
        if (pi < 0) break;
        std::swap(a[t], a[pi]);
        for (int i = 0; i < R; ++i) std::swap(a[i][t], a[i][pj]);
        for (;;) {
            bool clean = true;
            for (int i = t + 1; i < R; ++i) {
                if (a[i][t] == 0) continue;
                mpz_class q = a[i][t] / a[t][t];
                if (q != 0)
                    for (int j = t; j < C; ++j) a[i][j] -= q * a[t][j];
                if (a[i][t] != 0) {
                    std::swap(a[t], a[i]);
                    clean = false;
                }
            }
            if (!clean) continue;
            for (int j = t + 1; j < C; ++j) {
                if (a[t][j] == 0) continue;
                mpz_class q = a[t][j] / a[t][t];
                if (q != 0)
                    for (int i = t; i < R; ++i) a[i][j] -= q * a[i][t];
                if (a[t][j] != 0) {
                    for (int i = 0; i < R; ++i) std::swap(a[i][t], a[i][j]);
                    clean = false;
                }
            }
            if (!clean) continue;
            // pivot must divide the rest of the submatrix
            bool divides = true;
            for (int i = t + 1; i < R && divides; ++i)
                for (int j = t + 1; j < C && divides; ++j)
                    if (a[i][j] % a[t][t] != 0) {
                        for (int jj = t; jj < C; ++jj) a[t][jj] += a[i][jj];
                        divides = false;
                    }
            if (divides) break;
        }
        if (a[t][t] < 0) a[t][t] = -a[t][t];
        diag.push_back(a[t][t]);
        ++t;
    }
    return diag;
}

SmithForm snf_core(index_t rows, index_t cols, const std::vector<SparseEntry>& entries) {
    if (rows < 0 || cols < 0) throw invalid_input("smith_normal_form: negative dimensions");
    SparseMat m(rows, cols);
    for (const auto& [i, j, v] : entries) {
        if (i < 0 || i >= rows || j < 0 || j >= cols)
            throw invalid_input("smith_normal_form: entry out of bounds");
        m.set_initial(static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), v);
    }
    const index_t unit_rank = unit_pivot_phase(m);

    // compress the remainder (every entry now has |v| >= 2) to a dense block
    std::map<std::int32_t, int> rmap;
    std::map<std::int32_t, int> cmap;
    for (std::int32_t i = 0; i < m.nrows; ++i)
        if (!m.rows[i].empty()) rmap.emplace(i, static_cast<int>(rmap.size()));
    for (std::int32_t j = 0; j < m.ncols; ++j)
        if (!m.col_rows[j].empty()) cmap.emplace(j, static_cast<int>(cmap.size()));
    std::vector<std::vector<mpz_class>> dense(rmap.size(),
                                              std::vector<mpz_class>(cmap.size(), 0));
    for (const auto& [i, ri] : rmap)
        for (const auto& [j, v] : m.rows[i]) dense[ri][cmap.at(j)] = v;
    std::vector<mpz_class> tail = dense_snf(std::move(dense));

    SmithForm out;
    out.diagonal.assign(static_cast<std::size_t>(unit_rank), mpz_class(1));
    out.diagonal.insert(out.diagonal.end(), tail.begin(), tail.end());
    out.rank = static_cast<index_t>(out.diagonal.size());
    for (std::size_t i = 1; i < out.diagonal.size(); ++i)
        if (out.diagonal[i] % out.diagonal[i - 1] != 0)
            throw internal_error("smith_normal_form: divisibility chain violated");
    if (out.rank > std::min(rows, cols))
        throw internal_error("smith_normal_form: rank exceeds dimensions");
    return out;
}

}  // namespace

BoundaryMatrix boundary_matrix(const NerveComplex& complex, int k) {
    if (k < 1 || k > complex.q_max)
        throw invalid_input("boundary_matrix: k must satisfy 1 <= k <= q_max");
    BoundaryMatrix m;
    m.k = k;
    m.rows = complex.count(k - 1);
    m.cols = complex.count(k);
    m.col_ptr.assign(m.cols + 1, 0);
    m.row_idx.reserve(m.cols * (k + 1));
    m.sign.reserve(m.cols * (k + 1));
    const auto& faces = complex.simplices[k - 1];
    const auto& cells = complex.simplices[k];
    std::vector<std::int32_t> facet(k);
    for (index_t s = 0; s < m.cols; ++s) {
        const std::int32_t* verts = cells.data() + s * (k + 1);
        for (int j = 0; j <= k; ++j) {
            int w = 0;
            for (int i = 0; i <= k; ++i)
                if (i != j) facet[w++] = verts[i];
            index_t r = find_tuple(faces, k, facet.data());
            if (r < 0)
                throw invalid_input("boundary_matrix: facet missing from complex "
                                    "(downward closure violated)");
            m.row_idx.push_back(static_cast<std::int32_t>(r));
            m.sign.push_back(j % 2 == 0 ? 1 : -1);
        }
        m.col_ptr[s + 1] = static_cast<index_t>(m.row_idx.size());
    }
    return m;
}

bool composes_to_zero(const BoundaryMatrix& dk, const BoundaryMatrix& dk1) {
    if (dk.cols != dk1.rows) throw invalid_input("composes_to_zero: dimension mismatch");
    // product column by column; entries are tiny, so int64 accumulation is exact
    std::unordered_map<std::int32_t, long long> acc;
    for (index_t c = 0; c < dk1.cols; ++c) {
        acc.clear();
        for (index_t e = dk1.col_ptr[c]; e < dk1.col_ptr[c + 1]; ++e) {
            const std::int32_t mid = dk1.row_idx[e];
            const long long s = dk1.sign[e];
            for (index_t f = dk.col_ptr[mid]; f < dk.col_ptr[mid + 1]; ++f)
                acc[dk.row_idx[f]] += s * dk.sign[f];
        }
        for (const auto& [r, v] : acc)
            if (v != 0) return false;
    }
    return true;
}

SmithForm smith_normal_form(index_t rows, index_t cols, const std::vector<SparseEntry>& entries) {
    return snf_core(rows, cols, entries);
}

SmithForm smith_normal_form(const BoundaryMatrix& m) {
    std::vector<SparseEntry> entries;
    entries.reserve(m.row_idx.size());
    for (index_t c = 0; c < m.cols; ++c)
        for (index_t e = m.col_ptr[c]; e < m.col_ptr[c + 1]; ++e)
            entries.emplace_back(m.row_idx[e], c, m.sign[e]);
    return snf_core(m.rows, m.cols, entries);
}

SmithForm smith_normal_form_dense(const std::vector<std::vector<long long>>& rows) {
    const index_t r = static_cast<index_t>(rows.size());
    const index_t c = r ? static_cast<index_t>(rows[0].size()) : 0;
    std::vector<SparseEntry> entries;
    for (index_t i = 0; i < r; ++i) {
        if (static_cast<index_t>(rows[i].size()) != c)
            throw invalid_input("smith_normal_form: ragged matrix");
        for (index_t j = 0; j < c; ++j)
            if (rows[i][j] != 0) entries.emplace_back(i, j, rows[i][j]);
    }
    return snf_core(r, c, entries);
}

index_t rational_rank(index_t rows, index_t cols, const std::vector<SparseEntry>& entries) {
    // fraction-free (Bareiss) elimination, exact over the integers
    std::vector<std::vector<mpz_class>> a(static_cast<std::size_t>(rows),
                                          std::vector<mpz_class>(static_cast<std::size_t>(cols), 0));
    for (const auto& [i, j, v] : entries) {
        if (i < 0 || i >= rows || j < 0 || j >= cols)
            throw invalid_input("rational_rank: entry out of bounds");
        a[i][j] = static_cast<long>(v);
    }
    index_t rank = 0;
    mpz_class prev = 1;
    for (index_t col = 0; col < cols && rank < rows; ++col) {
        index_t piv = -1;
        for (index_t i = rank; i < rows; ++i)
            if (a[i][col] != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        std::swap(a[rank], a[piv]);
        for (index_t i = rank + 1; i < rows; ++i) {
            for (index_t j = col + 1; j < cols; ++j)
                a[i][j] = (a[rank][col] * a[i][j] - a[i][col] * a[rank][j]) / prev;
            a[i][col] = 0;
        }
        prev = a[rank][col];
        ++rank;
    }
    return rank;
}

index_t rational_rank(const BoundaryMatrix& m) {
    std::vector<SparseEntry> entries;
    for (index_t c = 0; c < m.cols; ++c)
        for (index_t e = m.col_ptr[c]; e < m.col_ptr[c + 1]; ++e)
            entries.emplace_back(m.row_idx[e], c, m.sign[e]);
    return rational_rank(m.rows, m.cols, entries);
}

HomologyResult homology_from_complex(const NerveComplex& complex, int q_top) {
    if (q_top < 0) throw invalid_input("homology_from_complex: q_top must be >= 0");
    if (q_top > complex.q_max)
        throw invalid_input("homology_from_complex: q_top too large for available "
                            "boundary data");
    std::vector<index_t> O(q_top + 2, 0);
    for (int q = 0; q <= q_top + 1; ++q) O[q] = complex.count(q);

    // t_k = rank del_k, with t_0 = 0 and del empty beyond the complex
    std::vector<index_t> t(q_top + 3, 0);
    std::vector<SmithForm> forms(q_top + 2);
    BoundaryMatrix prev;
    bool have_prev = false;
    for (int k = 1; k <= q_top + 1; ++k) {
        if (k > complex.q_max || complex.count(k) == 0) {
            for (int q = k + 1; q <= q_top + 1; ++q)
                if (complex.count(q) != 0)
                    throw invalid_input("homology_from_complex: simplices above an "
                                        "empty dimension");
            break;
        }
        BoundaryMatrix dk = boundary_matrix(complex, k);
        if (have_prev && !composes_to_zero(prev, dk))
            throw internal_error("homology: boundary composite is nonzero");
        forms[k] = smith_normal_form(dk);
        t[k] = forms[k].rank;
        prev = std::move(dk);
        have_prev = true;
    }

    HomologyResult res;
    for (int k = 0; k <= q_top; ++k) {
        index_t b = O[k] - t[k] - t[k + 1];
        if (b < 0) throw internal_error("homology: negative Betti number");
        res.betti.push_back(b);
        std::vector<mpz_class> tors;
        for (const auto& d : forms[k + 1].diagonal)
            if (d > 1) tors.push_back(d);
        res.torsion.push_back(std::move(tors));
    }
    return res;
}

}  // namespace realhom
