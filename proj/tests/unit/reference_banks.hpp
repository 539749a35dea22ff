#pragma once
// Literal transcription of the diversity-based target sampling pseudo-code,
// kept deliberately naive (recomputes everything, no caching) so it can serve
// as an oracle for the production implementation.
//
// Tie rules shared with the library contract:
//   * join: most similar prototype, ties to the bank with the smaller smallest-member id;
//   * merge: most similar prototype pair, ties to the lexicographically smallest
//     (min key, max key) pair of smallest-member ids; the merged bank keeps the
//     earlier position and the new bank is appended;
//   * per-bank pick: highest score, ties to the smaller id.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace bi3d::reference {

struct Bank {
    std::vector<double> c;           // prototype
    std::vector<std::string> P;      // members
};

inline double cos_sim(const std::vector<double>& u, const std::vector<double>& v) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    if (nu < 1e-12 || nv < 1e-12) return 0.0;
    return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

inline std::string smallest(const std::vector<std::string>& ids) {
    return *std::min_element(ids.begin(), ids.end());
}

// frames: (id, I_hat) in processing order.
inline std::vector<Bank> banks(const std::vector<std::pair<std::string, std::vector<double>>>& frames, std::size_t b_k,
                               bool max_pairwise_variant = false) {
    std::vector<Bank> B;
    for (const auto& [id, I] : frames) {
        // under capacity, every frame opens a bank
        if (B.size() < b_k) {
            B.push_back(Bank{I, {id}});
            continue;
        }
        // alpha = max_m cos(I, c_m)
        double alpha = -2.0;
        for (const auto& b : B) alpha = std::max(alpha, cos_sim(I, b.c));
        // compare against the pairwise prototype similarities
        bool have_pair = false;
        double beta_min = 2.0, beta_max = -2.0;
        for (std::size_t m = 0; m < B.size(); ++m) {
            for (std::size_t n = m + 1; n < B.size(); ++n) {
                const double s = cos_sim(B[m].c, B[n].c);
                beta_min = std::min(beta_min, s);
                beta_max = std::max(beta_max, s);
                have_pair = true;
            }
        }
        const double beta = max_pairwise_variant ? beta_max : beta_min;
        if (have_pair && alpha < beta) {
            // the two most similar banks
            std::size_t bm = 0, bn = 0;
            bool found = false;
            for (std::size_t m = 0; m < B.size(); ++m) {
                for (std::size_t n = m + 1; n < B.size(); ++n) {
                    if (cos_sim(B[m].c, B[n].c) != beta_max) continue;
                    auto key = std::minmax(smallest(B[m].P), smallest(B[n].P));
                    if (!found) {
                        bm = m, bn = n, found = true;
                        continue;
                    }
                    auto best = std::minmax(smallest(B[bm].P), smallest(B[bn].P));
                    if (key < best) bm = m, bn = n;
                }
            }
            // count-weighted prototype of the merged bank
            const double a = static_cast<double>(B[bm].P.size());
            const double b = static_cast<double>(B[bn].P.size());
            std::vector<double> c(B[bm].c.size());
            for (std::size_t i = 0; i < c.size(); ++i) c[i] = (a * B[bm].c[i] + b * B[bn].c[i]) / (a + b);
            B[bm].c = c;
            B[bm].P.insert(B[bm].P.end(), B[bn].P.begin(), B[bn].P.end());
            B.erase(B.begin() + static_cast<long>(bn));
            // the frame opens a fresh bank
            B.push_back(Bank{I, {id}});
        } else {
            // join the most similar bank, prototype untouched
            std::size_t best = 0;
            double best_s = -2.0;
            for (std::size_t m = 0; m < B.size(); ++m) {
                const double s = cos_sim(I, B[m].c);
                if (s > best_s || (s == best_s && smallest(B[m].P) < smallest(B[best].P))) {
                    best_s = s;
                    best = m;
                }
            }
            B[best].P.push_back(id);
        }
    }
    return B;
}

// top-1 domainness from each bank
inline std::vector<std::string> pick(const std::vector<Bank>& B, const std::map<std::string, double>& s) {
    std::vector<std::string> out;
    for (const auto& b : B) {
        std::string best = b.P.front();
        for (const auto& id : b.P) {
            if (s.at(id) > s.at(best) || (s.at(id) == s.at(best) && id < best)) best = id;
        }
        out.push_back(best);
    }
    return out;
}

} // namespace bi3d::reference
