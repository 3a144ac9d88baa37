#include "escape/blocks.hpp"

#include "escape/errors.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <tuple>

namespace escape::blocks {

namespace {

void validate_epsilon(const Rat& eps) {
    if (eps <= 0 || eps >= Rat(1, 2))
        throw NotCertified("epsilon must lie in (0, 1/2), got " + rat_str(eps));
}

void validate_beta(const Rat& beta) {
    if (beta <= 1 || beta >= 2)
        throw NotCertified("beta must lie in (1, 2), got " + rat_str(beta));
}

Rat c_upper_bound(const Rat& eps) { return 2 * exp_neg_upper(2 * eps * eps); }

} // namespace

long mismatch_threshold(long n, const Rat& eps) {
    Rat x = (Rat(1, 2) - eps) * static_cast<long>(n);
    return static_cast<long>(rat_ceil(x).get_si()) - 1;
}

Int ball_count(long n, long r) {
    if (r < 0)
        return Int(0);
    Int sum = 0;
    Int term;
    long top = std::min(r, n);
    for (long d = 0; d <= top; ++d) {
        mpz_bin_uiui(term.get_mpz_t(), static_cast<unsigned long>(n),
                     static_cast<unsigned long>(d));
        sum += term;
    }
    return sum;
}

BallTable::BallTable(long max_r) : max_r_(max_r), zero_(0) {
    if (max_r < 0)
        throw std::invalid_argument("BallTable max_r must be >= 0");
    rows_.push_back({Int(1)}); // S(0, 0) = 1
}

void BallTable::ensure(long n) {
    while (static_cast<long>(rows_.size()) <= n) {
        const long m = static_cast<long>(rows_.size());
        const auto& prev = rows_.back();
        auto prev_at = [&](long r) -> const Int& {
            if (r < 0)
                return zero_;
            return prev[std::min<size_t>(static_cast<size_t>(r),
                                         prev.size() - 1)];
        };
        const long cap = std::min(m, max_r_);
        std::vector<Int> row(static_cast<size_t>(cap) + 1);
        for (long r = 0; r <= cap; ++r)
            row[static_cast<size_t>(r)] = prev_at(r) + prev_at(r - 1);
        rows_.push_back(std::move(row));
    }
}

const Int& BallTable::get(long n, long r) const {
    if (r < 0)
        return zero_;
    if (n < 0 || static_cast<size_t>(n) >= rows_.size())
        throw InvariantBroken("BallTable row " + std::to_string(n) +
                              " not ensured");
    const long rr = std::min(r, n);
    if (rr > max_r_)
        throw InvariantBroken("BallTable query r=" + std::to_string(r) +
                              " beyond max_r=" + std::to_string(max_r_));
    return rows_[static_cast<size_t>(n)][static_cast<size_t>(rr)];
}

Rat exp_neg_upper(const Rat& x) {
    if (x < 0 || x > 1)
        throw std::invalid_argument("exp_neg_upper requires x in [0, 1]");
    // Alternating series with terms decreasing in absolute value; stopping
    // after the positive j=20 term overshoots exp(-x).
    Rat sum = 1;
    Rat term = 1;
    for (int j = 1; j <= 20; ++j) {
        term *= -x;
        term /= j;
        sum += term;
    }
    return sum;
}

BlocksParams certify(const Rat& epsilon, const Rat& beta, int N, int M) {
    validate_epsilon(epsilon);
    validate_beta(beta);
    if (N < 1)
        throw NotCertified("N must be >= 1, got " + std::to_string(N));
    if (M < 0)
        M = N + 160;
    if (M < N)
        throw NotCertified("M must be >= N");

    const Rat c_upper = c_upper_bound(epsilon);
    if (c_upper >= beta)
        throw NotCertified("c_upper = " + rat_str(c_upper) +
                           " >= beta; the tail does not converge");

    BallTable table(std::max(0L, mismatch_threshold(M + 1, epsilon)));
    table.ensure(M + 1);

    // Exact head: sum_{n=N}^{M} S(n, T(n)) * beta^-n.
    Rat omega = 0;
    Rat pw = rat_pow(beta, -N);
    for (long n = N; n <= M; ++n) {
        omega += Rat(table.get(n, mismatch_threshold(n, epsilon))) * pw;
        pw /= beta;
    }

    // Geometric tail covering n > M via S(n, T(n)) <= c_upper^n.
    const Rat rho = c_upper / beta;
    omega += rat_pow(rho, M + 1) / (1 - rho);

    // Spot-check the Hoeffding bound exactly where the tail takes over.
    const Int& cn = c_upper.get_num();
    const Int& cd = c_upper.get_den();
    for (long n = M; n <= M + 1; ++n) {
        Int lhs = table.get(n, mismatch_threshold(n, epsilon)) *
                  int_pow(cd, static_cast<unsigned>(n));
        if (lhs > int_pow(cn, static_cast<unsigned>(n)))
            throw NotCertified("ball bound exceeds c_upper^n at n = " +
                               std::to_string(n));
    }

    if (beta * (1 + omega) > 2)
        throw NotCertified("beta*(1+omega) = " + rat_str(beta * (1 + omega)) +
                           " exceeds 2 for N=" + std::to_string(N));
    return BlocksParams{epsilon, beta, N, c_upper, omega, M};
}

BlocksParams certify_min_N(const Rat& epsilon, const Rat& beta, int limit) {
    validate_epsilon(epsilon);
    validate_beta(beta);
    if (c_upper_bound(epsilon) >= beta)
        throw NotCertified("c_upper = " + rat_str(c_upper_bound(epsilon)) +
                           " >= beta; no N can certify");
    for (int n = 1; n <= limit; ++n) {
        try {
            return certify(epsilon, beta, n);
        } catch (const NotCertified&) {
        }
    }
    throw NotCertified("no certifying N up to " + std::to_string(limit));
}

HammingBallState::HammingBallState(
    const BallTable* table, std::shared_ptr<const std::vector<uint8_t>> anchor,
    long threshold, long consumed, long depth)
    : table_(table), anchor_(std::move(anchor)), threshold_(threshold),
      consumed_(consumed), depth_(depth) {
    if (!anchor_ || depth_ < 0 || consumed_ < 0 || consumed_ > threshold_)
        throw InvariantBroken("malformed Hamming ball state");
    if (depth_ > static_cast<long>(anchor_->size()))
        throw InvariantBroken("ball depth exceeds anchor length");
}

uint8_t HammingBallState::anchor_bit_at(long offset) const {
    return (*anchor_)[static_cast<size_t>(offset)];
}

Int HammingBallState::multiplicity() const {
    return table_->get(depth_, threshold_ - consumed_);
}

Int HammingBallState::child_multiplicity(int child) const {
    if (depth_ < 1)
        throw InvariantBroken("child of a depth-0 ball");
    const long pos = static_cast<long>(anchor_->size()) - depth_;
    const long q2 = consumed_ + (child != anchor_bit_at(pos) ? 1 : 0);
    return table_->get(depth_ - 1, threshold_ - q2);
}

std::shared_ptr<const game::BundleState>
HammingBallState::split(int child) const {
    if (depth_ < 1)
        throw InvariantBroken("split of a depth-0 ball");
    const long pos = static_cast<long>(anchor_->size()) - depth_;
    const long q2 = consumed_ + (child != anchor_bit_at(pos) ? 1 : 0);
    if (q2 > threshold_)
        return nullptr;
    return std::make_shared<HammingBallState>(table_, anchor_, threshold_, q2,
                                              depth_ - 1);
}

std::string HammingBallState::describe() const {
    std::ostringstream out;
    out << "ball(rem=";
    for (size_t i = anchor_->size() - static_cast<size_t>(depth_);
         i < anchor_->size(); ++i)
        out << static_cast<char>('0' + (*anchor_)[i]);
    out << ",T=" << threshold_ << ",q=" << consumed_ << ")";
    return out.str();
}

game::AliceMove make_move(std::span<const uint8_t> w,
                          const BlocksParams& params, BallTable& table) {
    game::AliceMove move;
    const long len = static_cast<long>(w.size());
    if (len < params.N)
        return move;
    table.ensure(len);
    move.additions.reserve(static_cast<size_t>(len - params.N + 1));
    for (long n = params.N; n <= len; ++n) {
        auto anchor = std::make_shared<std::vector<uint8_t>>(
            w.end() - n, w.end());
        move.additions.push_back(
            game::Obstruction::symbolic(std::make_shared<HammingBallState>(
                &table, std::move(anchor),
                mismatch_threshold(n, params.epsilon), 0L, n)));
    }
    return move;
}

std::vector<uint8_t> generate_reference(const BlocksParams& params,
                                        size_t length,
                                        game::EngineOptions opts) {
    BallTable table(
        std::max(0L, mismatch_threshold(static_cast<long>(length) + 1,
                                        params.epsilon)));
    game::Engine engine({2, params.beta, params.omega}, opts);
    BlocksAdversary adversary(params, table);
    return engine.run(adversary, length);
}

namespace {

// Non-zero (r, b) occupancy bitmap used to visit live cells only.
class NzMap {
public:
    NzMap(long max_r, long max_b)
        : stride_((static_cast<size_t>(max_b) >> 6) + 1),
          words_(static_cast<size_t>(max_r + 1) * stride_, 0) {}

    void set(long r, long b) {
        words_[static_cast<size_t>(r) * stride_ + (static_cast<size_t>(b) >> 6)] |=
            1ull << (b & 63);
    }
    void clear(long r, long b) {
        words_[static_cast<size_t>(r) * stride_ + (static_cast<size_t>(b) >> 6)] &=
            ~(1ull << (b & 63));
    }
    template <typename F> void for_each(long r, F&& fn) const {
        const size_t base = static_cast<size_t>(r) * stride_;
        for (size_t wi = 0; wi < stride_; ++wi) {
            uint64_t bits = words_[base + wi];
            while (bits) {
                const int tz = std::countr_zero(bits);
                fn(static_cast<long>(wi * 64 + static_cast<size_t>(tz)));
                bits &= bits - 1;
            }
        }
    }

private:
    size_t stride_;
    std::vector<uint64_t> words_;
};

struct Ball {
    uint32_t born;
    uint32_t n;
    uint32_t q;
};

} // namespace

std::vector<uint8_t> generate(const BlocksParams& params, size_t length) {
    const long L = static_cast<long>(length);
    const long N = params.N;
    std::vector<uint8_t> w;
    w.reserve(length);
    if (L == 0)
        return w;

    std::vector<long> thr(static_cast<size_t>(L) + 1, 0);
    for (long n = 1; n <= L; ++n)
        thr[static_cast<size_t>(n)] = mismatch_threshold(n, params.epsilon);
    const long max_b = *std::ranges::max_element(thr);

    BallTable table(std::max(0L, max_b));
    table.ensure(L);

    // cells[r][b][a]: live balls with `r` anchor bits left, `b` mismatches
    // still allowed, and `a` as the next anchor bit.
    const size_t bdim = static_cast<size_t>(max_b) + 1;
    std::vector<int64_t> cells(static_cast<size_t>(L + 1) * bdim * 2, 0);
    auto cell = [&](long r, long b, int a) -> int64_t& {
        return cells[(static_cast<size_t>(r) * bdim +
                      static_cast<size_t>(b)) * 2 + static_cast<size_t>(a)];
    };
    NzMap nz(L, max_b);
    std::vector<Ball> balls;

    const Int& num = params.beta.get_num();
    const Int& den = params.beta.get_den();
    Int pow_num_cmp = 1; // num^(t-1) while choosing w[t]
    Int x0, x1, pw, v0, v1;

    for (long t = 0; t < L; ++t) {
        if (t >= 2)
            pow_num_cmp *= num;

        // Alice: one fresh ball per anchor length.
        if (t >= N) {
            for (long n = N; n <= t; ++n) {
                balls.push_back({static_cast<uint32_t>(t),
                                 static_cast<uint32_t>(n), 0});
                const int a = w[static_cast<size_t>(t - n)];
                if (cell(n, thr[static_cast<size_t>(n)], 0) +
                        cell(n, thr[static_cast<size_t>(n)], 1) ==
                    0)
                    nz.set(n, thr[static_cast<size_t>(n)]);
                ++cell(n, thr[static_cast<size_t>(n)], a);
            }
        }

        // Bob: integer Horner over r of the per-child ledger weights;
        // child c is safe iff X_c < num^(t-1).
        int chosen = -1;
        if (balls.empty()) {
            chosen = 0;
        } else {
            x0 = 0;
            x1 = 0;
            pw = 1;
            for (long r = t; r >= 1; --r) {
                x0 *= den;
                x1 *= den;
                v0 = 0;
                v1 = 0;
                nz.for_each(r, [&](long b) {
                    for (int a = 0; a < 2; ++a) {
                        const int64_t k = cell(r, b, a);
                        if (k == 0)
                            continue;
                        const Int& same = table.get(r - 1, b);
                        const Int& diff = table.get(r - 1, b - 1);
                        mpz_addmul_ui((a == 0 ? v0 : v1).get_mpz_t(),
                                      same.get_mpz_t(),
                                      static_cast<unsigned long>(k));
                        mpz_addmul_ui((a == 0 ? v1 : v0).get_mpz_t(),
                                      diff.get_mpz_t(),
                                      static_cast<unsigned long>(k));
                    }
                });
                x0 += v0 * pw;
                x1 += v1 * pw;
                pw *= num;
            }
            if (x0 < pow_num_cmp)
                chosen = 0;
            else if (x1 < pow_num_cmp)
                chosen = 1;
            else
                throw NoSafeChild("no safe child at step " + std::to_string(t));
        }

        w.push_back(static_cast<uint8_t>(chosen));

        // Advance every live ball one level down.
        for (size_t i = 0; i < balls.size();) {
            Ball& ball = balls[i];
            const long s = t - static_cast<long>(ball.born);
            const long r = static_cast<long>(ball.n) - s;
            const long b = thr[ball.n] - static_cast<long>(ball.q);
            const int a = w[static_cast<size_t>(t - ball.n)];
            --cell(r, b, a);
            if (cell(r, b, 0) + cell(r, b, 1) == 0)
                nz.clear(r, b);
            const bool mismatch = (chosen != a);
            const long b2 = b - (mismatch ? 1 : 0);
            if (b2 < 0) {
                if (i + 1 != balls.size())
                    balls[i] = balls.back();
                balls.pop_back();
                continue;
            }
            if (r == 1)
                throw InvariantBroken(
                    "fast path completed a forbidden block at step " +
                    std::to_string(t));
            ball.q += mismatch ? 1 : 0;
            const int a2 = w[static_cast<size_t>(t + 1 - ball.n)];
            if (cell(r - 1, b2, 0) + cell(r - 1, b2, 1) == 0)
                nz.set(r - 1, b2);
            ++cell(r - 1, b2, a2);
            ++i;
        }
    }
    return w;
}

BlocksReport verify_blocks(std::span<const uint8_t> bits, const Rat& eps,
                           int N) {
    if (eps <= 0 || eps >= Rat(1, 2))
        throw ParseError("epsilon must lie in (0, 1/2), got " + rat_str(eps));
    if (N < 1)
        throw ParseError("N must be >= 1");
    BlocksReport report;
    const long L = static_cast<long>(bits.size());
    for (long n = N; 2 * n <= L; ++n) {
        const long threshold = mismatch_threshold(n, eps);
        long d = 0;
        for (long p = 0; p < n; ++p)
            d += bits[static_cast<size_t>(p)] !=
                 bits[static_cast<size_t>(p + n)];
        for (long i = 0;; ++i) {
            if (d <= threshold)
                report.hits.push_back({static_cast<size_t>(i),
                                       static_cast<size_t>(n)});
            if (i + 2 * n >= L)
                break;
            d -= bits[static_cast<size_t>(i)] !=
                 bits[static_cast<size_t>(i + n)];
            d += bits[static_cast<size_t>(i + n)] !=
                 bits[static_cast<size_t>(i + 2 * n)];
        }
    }
    std::ranges::sort(report.hits,
                      [](const BlocksHit& a, const BlocksHit& b) {
                          return std::tie(a.i, a.n) < std::tie(b.i, b.n);
                      });
    return report;
}

nlohmann::json BlocksReport::to_json() const {
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& hit : hits)
        violations.push_back({{"i", hit.i}, {"n", hit.n}});
    return report_envelope(std::move(violations));
}

} // namespace escape::blocks
