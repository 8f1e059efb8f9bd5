#pragma once

/**
 * @file tensor.hpp
 * @brief Truncated tensor algebra over an m-letter alphabet.
 *
 * Words are 1-based letter sequences. Level n of a series stores m^n
 * coefficients in base-m word order: index(w i) = index(w) * m + (i - 1).
 */

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace vsig {

/// Integer power m^n for level sizes.
inline std::size_t ipow(std::size_t m, int n) {
    std::size_t r = 1;
    for (int i = 0; i < n; ++i) r *= m;
    return r;
}

/// Total number of coefficients of a series truncated at level L.
inline std::size_t series_size(std::size_t m, int L) {
    std::size_t total = 0;
    for (int n = 0; n <= L; ++n) total += ipow(m, n);
    return total;
}

class Word {
public:
    Word() = default;
    Word(int m, std::vector<int> letters) : m_(m), letters_(std::move(letters)) {
        if (m_ < 1) throw std::invalid_argument("alphabet size must be positive");
        for (int a : letters_)
            if (a < 1 || a > m_) throw std::out_of_range("letter out of range");
    }

    /// Inverse of index(): the word of length n with flat index idx.
    static Word from_index(int m, int n, std::size_t idx) {
        if (idx >= ipow(static_cast<std::size_t>(m), n)) throw std::out_of_range("word index out of range");
        std::vector<int> letters(static_cast<std::size_t>(n));
        for (int k = n - 1; k >= 0; --k) {
            letters[static_cast<std::size_t>(k)] = static_cast<int>(idx % static_cast<std::size_t>(m)) + 1;
            idx /= static_cast<std::size_t>(m);
        }
        return Word(m, std::move(letters));
    }

    int alphabet() const { return m_; }
    int length() const { return static_cast<int>(letters_.size()); }
    bool empty() const { return letters_.empty(); }
    const std::vector<int>& letters() const { return letters_; }
    int operator[](std::size_t i) const { return letters_[i]; }

    std::size_t index() const {
        std::size_t idx = 0;
        for (int a : letters_) idx = idx * static_cast<std::size_t>(m_) + static_cast<std::size_t>(a - 1);
        return idx;
    }

    Word concat(const Word& other) const {
        if (other.m_ != m_) throw std::invalid_argument("alphabet mismatch");
        std::vector<int> l = letters_;
        l.insert(l.end(), other.letters_.begin(), other.letters_.end());
        return Word(m_, std::move(l));
    }

    Word prefix(int k) const { return Word(m_, {letters_.begin(), letters_.begin() + k}); }
    Word suffix(int k) const { return Word(m_, {letters_.begin() + k, letters_.end()}); }

    /// Comma separated letters, "" for the empty word.
    std::string str() const {
        std::string s;
        for (std::size_t i = 0; i < letters_.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(letters_[i]);
        }
        return s;
    }

    friend bool operator==(const Word& a, const Word& b) { return a.m_ == b.m_ && a.letters_ == b.letters_; }
    friend bool operator<(const Word& a, const Word& b) {
        if (a.letters_.size() != b.letters_.size()) return a.letters_.size() < b.letters_.size();
        return a.letters_ < b.letters_;
    }

private:
    int m_ = 1;
    std::vector<int> letters_;
};

/// Parses the comma separated form produced by Word::str().
inline Word parse_word(int m, const std::string& s) {
    std::vector<int> letters;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        letters.push_back(std::stoi(s.substr(pos, next - pos)));
        pos = next + 1;
    }
    return Word(m, std::move(letters));
}

template <typename Scalar>
class BasicTensorSeries {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    BasicTensorSeries() : BasicTensorSeries(1, 0) {}
    BasicTensorSeries(int m, int L) : m_(m), L_(L) {
        if (m < 1) throw std::invalid_argument("alphabet size must be positive");
        if (L < 0) throw std::invalid_argument("truncation level must be non-negative");
        levels_.reserve(static_cast<std::size_t>(L) + 1);
        for (int n = 0; n <= L; ++n) levels_.push_back(Vector::Zero(static_cast<Eigen::Index>(ipow(m, n))));
    }

    /// The unit series 1.
    static BasicTensorSeries unit(int m, int L) {
        BasicTensorSeries s(m, L);
        s.levels_[0](0) = Scalar(1);
        return s;
    }

    /// Rebuilds a series from its concatenated coefficients.
    static BasicTensorSeries from_flat(int m, int L, const Vector& flat) {
        BasicTensorSeries s(m, L);
        if (static_cast<std::size_t>(flat.size()) != series_size(m, L))
            throw std::invalid_argument("flat coefficient vector has wrong size");
        Eigen::Index off = 0;
        for (auto& lv : s.levels_) {
            lv = flat.segment(off, lv.size());
            off += lv.size();
        }
        return s;
    }

    int alphabet() const { return m_; }
    int depth() const { return L_; }
    std::size_t size() const { return series_size(m_, L_); }

    Vector& level(int n) { return levels_.at(static_cast<std::size_t>(n)); }
    const Vector& level(int n) const { return levels_.at(static_cast<std::size_t>(n)); }

    Scalar& operator[](const Word& w) {
        check_word(w);
        return levels_[static_cast<std::size_t>(w.length())](static_cast<Eigen::Index>(w.index()));
    }
    Scalar operator[](const Word& w) const {
        check_word(w);
        return levels_[static_cast<std::size_t>(w.length())](static_cast<Eigen::Index>(w.index()));
    }

    Vector flat() const {
        Vector out(static_cast<Eigen::Index>(size()));
        Eigen::Index off = 0;
        for (const auto& lv : levels_) {
            out.segment(off, lv.size()) = lv;
            off += lv.size();
        }
        return out;
    }

    BasicTensorSeries truncated(int L) const {
        if (L > L_) throw std::invalid_argument("cannot raise truncation level");
        BasicTensorSeries s(m_, L);
        for (int n = 0; n <= L; ++n) s.levels_[static_cast<std::size_t>(n)] = levels_[static_cast<std::size_t>(n)];
        return s;
    }

    BasicTensorSeries& operator+=(const BasicTensorSeries& o) {
        check_same(o);
        for (std::size_t n = 0; n < levels_.size(); ++n) levels_[n] += o.levels_[n];
        return *this;
    }
    BasicTensorSeries& operator-=(const BasicTensorSeries& o) {
        check_same(o);
        for (std::size_t n = 0; n < levels_.size(); ++n) levels_[n] -= o.levels_[n];
        return *this;
    }
    BasicTensorSeries& operator*=(Scalar c) {
        for (auto& lv : levels_) lv *= c;
        return *this;
    }
    friend BasicTensorSeries operator+(BasicTensorSeries a, const BasicTensorSeries& b) { return a += b; }
    friend BasicTensorSeries operator-(BasicTensorSeries a, const BasicTensorSeries& b) { return a -= b; }
    friend BasicTensorSeries operator*(Scalar c, BasicTensorSeries a) { return a *= c; }

    /// Largest absolute coefficient.
    Scalar max_abs() const {
        Scalar r(0);
        for (const auto& lv : levels_)
            if (lv.size()) r = std::max(r, lv.cwiseAbs().maxCoeff());
        return r;
    }

private:
    void check_word(const Word& w) const {
        if (w.alphabet() != m_) throw std::invalid_argument("alphabet mismatch");
        if (w.length() > L_) throw std::out_of_range("word longer than truncation level");
    }
    void check_same(const BasicTensorSeries& o) const {
        if (o.m_ != m_ || o.L_ != L_) throw std::invalid_argument("series shape mismatch");
    }

    int m_;
    int L_;
    std::vector<Vector> levels_;
};

using TensorSeries = BasicTensorSeries<double>;

/// Flat index of a word inside its level.
inline std::size_t word_index(const Word& w) { return w.index(); }

/// Truncated tensor product; level n is sum_k a^(k) (x) b^(n-k).
template <typename Scalar>
BasicTensorSeries<Scalar> tensor_mul(const BasicTensorSeries<Scalar>& a, const BasicTensorSeries<Scalar>& b, int L) {
    if (a.alphabet() != b.alphabet()) throw std::invalid_argument("alphabet mismatch");
    const int m = a.alphabet();
    BasicTensorSeries<Scalar> out(m, L);
    for (int n = 0; n <= L; ++n) {
        auto& dst = out.level(n);
        for (int k = 0; k <= n; ++k) {
            if (k > a.depth() || n - k > b.depth()) continue;
            const auto& x = a.level(k);
            const auto& y = b.level(n - k);
            const Eigen::Index ny = y.size();
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                if (x(i) == Scalar(0)) continue;
                dst.segment(i * ny, ny) += x(i) * y;
            }
        }
    }
    return out;
}

template <typename Scalar>
BasicTensorSeries<Scalar> tensor_mul(const BasicTensorSeries<Scalar>& a, const BasicTensorSeries<Scalar>& b) {
    return tensor_mul(a, b, std::min(a.depth(), b.depth()));
}

/// Hilbert-Schmidt pairing over the common levels.
template <typename Scalar>
Scalar inner_product(const BasicTensorSeries<Scalar>& a, const BasicTensorSeries<Scalar>& b) {
    if (a.alphabet() != b.alphabet()) throw std::invalid_argument("alphabet mismatch");
    Scalar s(0);
    for (int n = 0; n <= std::min(a.depth(), b.depth()); ++n) s += a.level(n).dot(b.level(n));
    return s;
}

/// exp(v) truncated at L for a level-one vector v: level n is v^{(x)n}/n!.
template <typename Scalar>
BasicTensorSeries<Scalar> tensor_exp(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v, int L) {
    const int m = static_cast<int>(v.size());
    auto out = BasicTensorSeries<Scalar>::unit(m, L);
    for (int n = 1; n <= L; ++n) {
        const auto& prev = out.level(n - 1);
        auto& cur = out.level(n);
        for (Eigen::Index i = 0; i < prev.size(); ++i) cur.segment(i * m, m) = prev(i) * v / Scalar(n);
    }
    return out;
}

/// Inverse of a group-like element: coefficient of w is (-1)^|w| times that of reversed w.
template <typename Scalar>
BasicTensorSeries<Scalar> grouplike_inverse(const BasicTensorSeries<Scalar>& s) {
    const int m = s.alphabet();
    BasicTensorSeries<Scalar> out(m, s.depth());
    for (int n = 0; n <= s.depth(); ++n) {
        const Scalar sign = (n % 2) ? Scalar(-1) : Scalar(1);
        const std::size_t count = ipow(static_cast<std::size_t>(m), n);
        for (std::size_t idx = 0; idx < count; ++idx) {
            std::size_t rev = 0, x = idx;
            for (int k = 0; k < n; ++k) {
                rev = rev * static_cast<std::size_t>(m) + x % static_cast<std::size_t>(m);
                x /= static_cast<std::size_t>(m);
            }
            out.level(n)(static_cast<Eigen::Index>(idx)) = sign * s.level(n)(static_cast<Eigen::Index>(rev));
        }
    }
    return out;
}

class LinearFunctional {
public:
    explicit LinearFunctional(int m) : m_(m) {}

    void set(const Word& w, double c) {
        if (w.alphabet() != m_) throw std::invalid_argument("alphabet mismatch");
        coeffs_[w] = c;
    }
    int alphabet() const { return m_; }
    const std::map<Word, double>& coefficients() const { return coeffs_; }

private:
    int m_;
    std::map<Word, double> coeffs_;
};

template <typename Scalar>
Scalar apply_functional(const LinearFunctional& l, const BasicTensorSeries<Scalar>& x) {
    if (l.alphabet() != x.alphabet()) throw std::invalid_argument("alphabet mismatch");
    Scalar s(0);
    for (const auto& [w, c] : l.coefficients()) {
        if (w.length() > x.depth()) throw std::out_of_range("functional word longer than truncation level");
        s += Scalar(c) * x[w];
    }
    return s;
}

}  // namespace vsig
