#pragma once

// Classical trusted-initializer bit commitment over Z_p (the line/point
// scheme): the randomness cost baseline the quantum commodity is compared
// against, with exhaustive hiding and binding checks.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "qott/random.hpp"

namespace qott {

/// Ted's cards: Alice gets a random line (slope a, intercept b), Bob gets a
/// random point on it at nonzero abscissa (x1 = 0 would reveal the
/// intercept, and with it the committed message).
struct RivestCards {
  int a = 0, b = 0;   // Alice: y = a x + b over Z_p
  int x1 = 0, y1 = 0; // Bob: a point with y1 = a x1 + b
};

struct RivestScheme {
  int p;

  explicit RivestScheme(int p_) : p(p_) {
    if (!is_prime(p)) throw std::invalid_argument("RivestScheme: p not prime");
  }

  RivestCards deal(std::mt19937_64& rng) const {
    std::uniform_int_distribution<int> zp(0, p - 1);
    std::uniform_int_distribution<int> zpx(1, p - 1);
    RivestCards c;
    c.a = zp(rng);
    c.b = zp(rng);
    c.x1 = zpx(rng);
    c.y1 = (c.a * c.x1 + c.b) % p;
    return c;
  }

  /// COMMIT: Alice sends c = m + b mod p.
  int commit(const RivestCards& cards, int m) const {
    if (m < 0 || m >= p) throw std::invalid_argument("commit: m out of range");
    return (m + cards.b) % p;
  }

  /// REVEAL: Alice announces (m, a, b); Bob checks his point lies on the
  /// line and that the commitment matches.
  bool reveal_accept(const RivestCards& cards, int commitment, int m, int a,
                     int b) const {
    bool on_line = (a * cards.x1 + b) % p == cards.y1;
    bool matches = (m + b) % p == commitment;
    return on_line && matches;
  }
};

struct RivestAudit {
  double card_entropy_bits = 0.0;     // joint entropy of (a,b,x1,y1)
  double hiding_mutual_info = 0.0;    // I(m ; Bob's view) by enumeration
  double best_cheat_acceptance = 0.0; // optimal reveal of m' != m
};

/// Exhaustive audit over all cards and commitments.
inline RivestAudit rivest_audit(int p) {
  RivestScheme scheme(p);
  RivestAudit audit;

  // joint card distribution: uniform over (a, b, x1 != 0), y1 determined
  const long n_cards = static_cast<long>(p) * p * (p - 1);
  audit.card_entropy_bits = std::log2(static_cast<double>(n_cards));

  // hiding: for fixed m, Bob sees (x1, y1, c). Given (x1, y1) with x1 != 0,
  // b = y1 - a x1 is uniform over a, so c = m + b carries nothing about m;
  // enumerated rather than asserted. p(view | m) over views (x1, y1, c)
  std::vector<std::vector<double>> view_given_m(
      p, std::vector<double>(static_cast<std::size_t>(p) * p * p, 0.0));
  for (int m = 0; m < p; ++m)
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b)
        for (int x1 = 1; x1 < p; ++x1) {
          int y1 = (a * x1 + b) % p;
          int c = (m + b) % p;
          long view = (static_cast<long>(x1) * p + y1) * p + c;
          view_given_m[m][view] += 1.0 / n_cards;
        }
  // I(m; view) with m uniform
  double mi = 0.0;
  const std::size_t n_views = static_cast<std::size_t>(p) * p * p;
  for (std::size_t v = 0; v < n_views; ++v) {
    double pv = 0.0;
    for (int m = 0; m < p; ++m) pv += view_given_m[m][v] / p;
    if (pv < 1e-15) continue;
    for (int m = 0; m < p; ++m) {
      double joint = view_given_m[m][v] / p;
      if (joint > 1e-15) mi += joint * std::log2(joint / ((1.0 / p) * pv));
    }
  }
  audit.hiding_mutual_info = std::abs(mi);

  // binding: Alice commits honestly to m, tries to reveal m' != m with the
  // best (a', b') given her card (a, b). b' is forced to c - m' != b, so the
  // two lines meet in exactly one point; the best a' passes with prob
  // 1/(p-1) over Bob's abscissa.
  double worst = 0.0;
  for (int m = 0; m < p; ++m)
    for (int mp = 0; mp < p; ++mp) {
      if (mp == m) continue;
      double total = 0.0;
      for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
          int c = (m + b) % p;
          int bp = ((c - mp) % p + p) % p;
          double best = 0.0;
          for (int ap = 0; ap < p; ++ap) {
            // acceptance over Bob's unknown x1 (uniform, nonzero)
            int hits = 0;
            for (int x1 = 1; x1 < p; ++x1) {
              int y1 = (a * x1 + b) % p;
              if ((ap * x1 + bp) % p == y1) ++hits;
            }
            best = std::max(best, static_cast<double>(hits) / (p - 1));
          }
          total += best / (static_cast<double>(p) * p);
        }
      worst = std::max(worst, total);
    }
  audit.best_cheat_acceptance = worst;
  return audit;
}

}  // namespace qott
