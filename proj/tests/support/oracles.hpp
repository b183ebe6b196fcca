#pragma once

// Brute-force reference implementations. They deliberately avoid the
// library and Eigen so that agreement means something.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using Point = std::vector<double>;
using Points = std::vector<Point>;
using Mat = std::vector<std::vector<double>>;

inline double distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

inline Mat distances(const Points& p) {
    Mat d(p.size(), std::vector<double>(p.size(), 0.0));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j) d[i][j] = distance(p[i], p[j]);
    return d;
}

inline Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.size(), std::vector<double>(b[0].size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k)
            for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline double silhouette(const Points& p, const std::vector<std::string>& lab) {
    const std::size_t n = p.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::map<std::string, std::pair<double, int>> sums;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            auto& s = sums[lab[j]];
            s.first += distance(p[i], p[j]);
            s.second += 1;
        }
        if (!sums.count(lab[i])) continue;  // singleton
        const double a = sums[lab[i]].first / sums[lab[i]].second;
        double b = std::numeric_limits<double>::infinity();
        for (auto& [l, s] : sums)
            if (l != lab[i]) b = std::min(b, s.first / s.second);
        const double m = std::max(a, b);
        if (m > 0) total += (b - a) / m;
    }
    return total / static_cast<double>(n);
}

inline double davies_bouldin(const Points& p, const std::vector<std::string>& lab) {
    std::map<std::string, std::vector<std::size_t>> g;
    for (std::size_t i = 0; i < p.size(); ++i) g[lab[i]].push_back(i);
    std::vector<Point> cen;
    std::vector<double> sc;
    for (auto& [l, idx] : g) {
        Point c(p[0].size(), 0.0);
        for (auto i : idx)
            for (std::size_t k = 0; k < c.size(); ++k) c[k] += p[i][k] / static_cast<double>(idx.size());
        double s = 0.0;
        for (auto i : idx) s += distance(p[i], c);
        cen.push_back(c);
        sc.push_back(s / static_cast<double>(idx.size()));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < cen.size(); ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < cen.size(); ++j)
            if (i != j) worst = std::max(worst, (sc[i] + sc[j]) / distance(cen[i], cen[j]));
        total += worst;
    }
    return total / static_cast<double>(cen.size());
}

// Average rank by counting: rank = #smaller + (#equal + 1) / 2.
inline std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0, eq = 0;
        for (double w : v) {
            if (w < v[i]) ++less;
            if (w == v[i]) ++eq;
        }
        r[i] = less + (eq + 1.0) / 2.0;
    }
    return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i] / n;
        mb += b[i] / n;
    }
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    return pearson(ranks(a), ranks(b));
}

inline double global_preservation(const Points& high, const Points& low) {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < high.size(); ++i)
        for (std::size_t j = i + 1; j < high.size(); ++j) {
            a.push_back(distance(high[i], high[j]));
            b.push_back(distance(low[i], low[j]));
        }
    return spearman(a, b);
}

struct Linearity {
    double variance_ratio;
    double spearman;
};

// Closed-form 2x2 covariance eigenproblem.
inline Linearity branch_linearity(const Points& pts) {
    const double n = static_cast<double>(pts.size());
    double mx = 0, my = 0;
    for (auto& p : pts) {
        mx += p[0] / n;
        my += p[1] / n;
    }
    double a = 0, b = 0, c = 0;
    for (auto& p : pts) {
        a += (p[0] - mx) * (p[0] - mx) / n;
        b += (p[0] - mx) * (p[1] - my) / n;
        c += (p[1] - my) * (p[1] - my) / n;
    }
    const double half = 0.5 * (a + c);
    const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    const double l1 = half + rad, l2 = std::max(half - rad, 0.0);
    double vx, vy;
    if (std::abs(b) > 1e-300) {
        vx = l1 - c;
        vy = b;
    } else if (a >= c) {
        vx = 1;
        vy = 0;
    } else {
        vx = 0;
        vy = 1;
    }
    std::vector<double> order, pos;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        order.push_back(static_cast<double>(i));
        pos.push_back((pts[i][0] - mx) * vx + (pts[i][1] - my) * vy);
    }
    return {l1 / (l1 + l2), spearman(order, pos)};
}

// Gift wrapping, then a triangle fan.
inline double hull_area(Points pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return 0.0;
    auto cross = [](const Point& o, const Point& a, const Point& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Point> hull;
    std::size_t start = 0;  // lexicographically smallest point is on the hull
    std::size_t cur = start;
    do {
        hull.push_back(pts[cur]);
        std::size_t next = (cur + 1) % pts.size();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double cr = cross(pts[cur], pts[next], pts[i]);
            if (cr < 0 || (cr == 0 && distance(pts[cur], pts[i]) > distance(pts[cur], pts[next]))) next = i;
        }
        cur = next;
    } while (cur != start && hull.size() <= pts.size());
    double area = 0.0;
    for (std::size_t i = 1; i + 1 < hull.size(); ++i) area += cross(hull[0], hull[i], hull[i + 1]) / 2.0;
    return std::abs(area);
}

// Cyclic Jacobi rotations for symmetric matrices; eigenvalues descending.
inline std::vector<double> jacobi_eigenvalues(Mat a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

}  // namespace oracle
