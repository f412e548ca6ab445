#include "nsch/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace nsch {

namespace {
std::atomic<int> g_threads{1};

// Chunk [0,n) into exactly `parts` contiguous ranges (some possibly empty);
// pure function of (n, parts) so decompositions are reproducible.
struct Chunks {
    std::int64_t n;
    int parts;
    std::pair<std::int64_t, std::int64_t> operator[](int c) const {
        const std::int64_t base = n / parts, rem = n % parts;
        const std::int64_t b = c * base + std::min<std::int64_t>(c, rem);
        const std::int64_t e = b + base + (c < rem ? 1 : 0);
        return {b, e};
    }
};
} // namespace

void set_num_threads(int n) { g_threads.store(std::clamp(n, 1, 256)); }
int num_threads() { return g_threads.load(); }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body) {
    const int parts = num_threads();
    if (parts == 1 || n < 4096) {
        body(0, n);
        return;
    }
    Chunks ch{n, parts};
    std::vector<std::thread> pool;
    pool.reserve(parts - 1);
    for (int c = 1; c < parts; ++c) {
        auto [b, e] = ch[c];
        if (b < e) pool.emplace_back([&body, b, e] { body(b, e); });
    }
    auto [b0, e0] = ch[0];
    if (b0 < e0) body(b0, e0);
    for (auto& t : pool) t.join();
}

double parallel_sum(std::int64_t n, const std::function<double(std::int64_t)>& term) {
    const int parts = num_threads();
    Chunks ch{n, parts};
    std::vector<double> partial(parts, 0.0);
    // The chunk layout (hence the floating-point summation order) is fixed by
    // (n, parts) whether or not the chunks run concurrently.
    if (parts == 1 || n < 4096) {
        double s = 0.0;
        for (std::int64_t i = 0; i < n; ++i) s += term(i);
        return s;
    }
    std::vector<std::thread> pool;
    pool.reserve(parts - 1);
    for (int c = 1; c < parts; ++c) {
        auto [b, e] = ch[c];
        pool.emplace_back([&, c, b, e] {
            double s = 0.0;
            for (std::int64_t i = b; i < e; ++i) s += term(i);
            partial[c] = s;
        });
    }
    {
        auto [b, e] = ch[0];
        double s = 0.0;
        for (std::int64_t i = b; i < e; ++i) s += term(i);
        partial[0] = s;
    }
    for (auto& t : pool) t.join();
    double total = 0.0;
    for (int c = 0; c < parts; ++c) total += partial[c];
    return total;
}

double parallel_max(std::int64_t n, const std::function<double(std::int64_t)>& term) {
    if (n <= 0) return 0.0;
    const int parts = num_threads();
    Chunks ch{n, parts};
    if (parts == 1 || n < 4096) {
        double m = term(0);
        for (std::int64_t i = 1; i < n; ++i) m = std::max(m, term(i));
        return m;
    }
    std::vector<double> partial(parts, -1e300);
    std::vector<std::thread> pool;
    pool.reserve(parts - 1);
    for (int c = 1; c < parts; ++c) {
        auto [b, e] = ch[c];
        pool.emplace_back([&, c, b, e] {
            double m = -1e300;
            for (std::int64_t i = b; i < e; ++i) m = std::max(m, term(i));
            partial[c] = m;
        });
    }
    {
        auto [b, e] = ch[0];
        double m = -1e300;
        for (std::int64_t i = b; i < e; ++i) m = std::max(m, term(i));
        partial[0] = m;
    }
    for (auto& t : pool) t.join();
    double total = partial[0];
    for (int c = 1; c < parts; ++c) total = std::max(total, partial[c]);
    return total;
}

} // namespace nsch
