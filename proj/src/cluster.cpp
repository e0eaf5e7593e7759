#include "elute/cluster.hpp"

#include "elute/errors.hpp"
#include "elute/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace elute {

namespace {

double sq_dist(const Eigen::MatrixXd& X, long row, const Eigen::RowVectorXd& center) {
    return (X.row(row) - center).squaredNorm();
}

// k-means++ seeding over the rows of X; returns row indices.
std::vector<long> seed_plusplus(const Eigen::MatrixXd& X, int k, RngStream& rng) {
    const long p = X.rows();
    std::vector<long> chosen;
    chosen.push_back(static_cast<long>(rng.integer(static_cast<std::uint64_t>(p))));
    std::vector<double> dist2(p, 0.0);
    while (static_cast<int>(chosen.size()) < k) {
        double total = 0.0;
        for (long r = 0; r < p; ++r) {
            double best = std::numeric_limits<double>::infinity();
            for (const long c : chosen) {
                best = std::min(best, (X.row(r) - X.row(c)).squaredNorm());
            }
            dist2[r] = best;
            total += best;
        }
        long pick = -1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (long r = 0; r < p; ++r) {
                acc += dist2[r];
                if (acc >= target) {
                    pick = r;
                    break;
                }
            }
        }
        if (pick < 0) {
            // all remaining rows coincide with chosen ones: take the first unchosen
            for (long r = 0; r < p; ++r) {
                if (std::find(chosen.begin(), chosen.end(), r) == chosen.end()) {
                    pick = r;
                    break;
                }
            }
            if (pick < 0) {
                pick = 0;
            }
        }
        chosen.push_back(pick);
    }
    return chosen;
}

void assign_nearest(const Eigen::MatrixXd& X, const Eigen::MatrixXd& centroids,
                    std::vector<int>& labels) {
    const long p = X.rows();
    labels.resize(p);
    for (long r = 0; r < p; ++r) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (long c = 0; c < centroids.rows(); ++c) {
            const double d = sq_dist(X, r, centroids.row(c));
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        labels[r] = best;
    }
}

double assignment_distortion(const Eigen::MatrixXd& X, const Eigen::MatrixXd& centroids,
                             const std::vector<int>& labels) {
    double acc = 0.0;
    for (long r = 0; r < X.rows(); ++r) {
        acc += sq_dist(X, r, centroids.row(labels[r]));
    }
    return acc;
}

// Re-seed any emptied centroid at the row farthest from its current centroid.
bool fix_empty_clusters(const Eigen::MatrixXd& X, Eigen::MatrixXd& centroids,
                        std::vector<int>& labels) {
    bool reseeded = false;
    const int k = static_cast<int>(centroids.rows());
    std::vector<long> counts(k, 0);
    for (const int l : labels) {
        ++counts[l];
    }
    for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) {
            continue;
        }
        long farthest = 0;
        double best = -1.0;
        for (long r = 0; r < X.rows(); ++r) {
            const double d = sq_dist(X, r, centroids.row(labels[r]));
            if (d > best) {
                best = d;
                farthest = r;
            }
        }
        centroids.row(c) = X.row(farthest);
        --counts[labels[farthest]];
        labels[farthest] = c;
        counts[c] = 1;
        reseeded = true;
    }
    return reseeded;
}

enum class UpdateRule { mean, median };

ClusterAssignment lloyd_run(const Eigen::MatrixXd& X, int k, RngStream& rng,
                            UpdateRule rule) {
    const long q = X.cols();
    ClusterAssignment result;
    result.k = k;
    const auto seeds = seed_plusplus(X, k, rng);
    result.centroids.resize(k, q);
    for (int c = 0; c < k; ++c) {
        result.centroids.row(c) = X.row(seeds[c]);
    }
    std::vector<int> previous;
    for (int iter = 0; iter < 200; ++iter) {
        assign_nearest(X, result.centroids, result.labels);
        if (fix_empty_clusters(X, result.centroids, result.labels)) {
            result.reseeded_empty_cluster = true;
        }
        if (result.labels == previous) {
            break;
        }
        previous = result.labels;
        for (int c = 0; c < k; ++c) {
            std::vector<long> rows;
            for (long r = 0; r < X.rows(); ++r) {
                if (result.labels[r] == c) {
                    rows.push_back(r);
                }
            }
            if (rows.empty()) {
                continue;
            }
            if (rule == UpdateRule::mean) {
                Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(q);
                for (const long r : rows) {
                    mean += X.row(r);
                }
                result.centroids.row(c) = mean / static_cast<double>(rows.size());
            } else {
                std::vector<double> column(rows.size());
                for (long j = 0; j < q; ++j) {
                    for (size_t i = 0; i < rows.size(); ++i) {
                        column[i] = X(rows[i], j);
                    }
                    std::sort(column.begin(), column.end());
                    const size_t mid = column.size() / 2;
                    result.centroids(c, j) = column.size() % 2 == 1
                        ? column[mid]
                        : 0.5 * (column[mid - 1] + column[mid]);
                }
            }
        }
    }
    assign_nearest(X, result.centroids, result.labels);
    result.distortion = assignment_distortion(X, result.centroids, result.labels);
    return result;
}

void check_cluster_args(const Eigen::MatrixXd& X, int k) {
    if (X.rows() < 1 || X.cols() < 1) {
        throw ConfigError("clustering needs a non-empty feature matrix");
    }
    if (k < 1 || k > X.rows()) {
        throw ConfigError("cluster count must lie in [1, rows]");
    }
}

ClusterAssignment best_of_restarts(const Eigen::MatrixXd& X, int k, std::uint64_t seed,
                                   int restarts, UpdateRule rule, ClusterMethod method) {
    ClusterAssignment best;
    best.distortion = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(restarts, 1); ++r) {
        RngStream rng(RngStream::substream_seed(seed, static_cast<std::uint64_t>(r)));
        ClusterAssignment run = lloyd_run(X, k, rng, rule);
        if (run.distortion < best.distortion) {
            best = std::move(run);
        }
    }
    best.method = method;
    return best;
}

} // namespace

std::string cluster_method_name(ClusterMethod m) {
    switch (m) {
    case ClusterMethod::kmeans:
        return "kmeans";
    case ClusterMethod::kmedoids:
        return "kmedoids";
    case ClusterMethod::kmedians:
        return "kmedians";
    case ClusterMethod::hierarchical:
        return "hierarchical";
    }
    return "unknown";
}

std::vector<std::vector<int>> ClusterAssignment::members() const {
    std::vector<std::vector<int>> out(k);
    for (size_t r = 0; r < labels.size(); ++r) {
        out[labels[r]].push_back(static_cast<int>(r));
    }
    return out;
}

double distortion(const Eigen::MatrixXd& X, const ClusterAssignment& assignment) {
    return assignment_distortion(X, assignment.centroids, assignment.labels);
}

double penalized_distortion(const Eigen::MatrixXd& X, const ClusterAssignment& assignment,
                            double lambda) {
    return distortion(X, assignment) + lambda * assignment.k;
}

ClusterAssignment kmeans(const Eigen::MatrixXd& X, int k, std::uint64_t seed, int restarts) {
    check_cluster_args(X, k);
    return best_of_restarts(X, k, seed, restarts, UpdateRule::mean, ClusterMethod::kmeans);
}

ClusterAssignment kmedians(const Eigen::MatrixXd& X, int k, std::uint64_t seed, int restarts) {
    check_cluster_args(X, k);
    return best_of_restarts(X, k, seed, restarts, UpdateRule::median, ClusterMethod::kmedians);
}

ClusterAssignment kmedoids(const Eigen::MatrixXd& X, int k, std::uint64_t seed, int restarts) {
    check_cluster_args(X, k);
    const long p = X.rows();
    // Pairwise squared distances once; PAM swap descent per restart.
    Eigen::MatrixXd d2(p, p);
    for (long a = 0; a < p; ++a) {
        for (long b = 0; b < p; ++b) {
            d2(a, b) = (X.row(a) - X.row(b)).squaredNorm();
        }
    }
    auto cost_of = [&](const std::vector<long>& medoids) {
        double acc = 0.0;
        for (long r = 0; r < p; ++r) {
            double best = std::numeric_limits<double>::infinity();
            for (const long m : medoids) {
                best = std::min(best, d2(r, m));
            }
            acc += best;
        }
        return acc;
    };

    ClusterAssignment best;
    best.distortion = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < std::max(restarts, 1); ++rep) {
        RngStream rng(RngStream::substream_seed(seed, static_cast<std::uint64_t>(rep)));
        std::vector<long> medoids = seed_plusplus(X, k, rng);
        double cost = cost_of(medoids);
        bool improved = true;
        int guard = 0;
        while (improved && guard++ < 1000) {
            improved = false;
            double best_cost = cost;
            int best_slot = -1;
            long best_row = -1;
            for (int s = 0; s < k; ++s) {
                for (long r = 0; r < p; ++r) {
                    if (std::find(medoids.begin(), medoids.end(), r) != medoids.end()) {
                        continue;
                    }
                    std::vector<long> trial = medoids;
                    trial[s] = r;
                    const double c = cost_of(trial);
                    if (c < best_cost - 1e-15) {
                        best_cost = c;
                        best_slot = s;
                        best_row = r;
                    }
                }
            }
            if (best_slot >= 0) {
                medoids[best_slot] = best_row;
                cost = best_cost;
                improved = true;
            }
        }
        if (cost < best.distortion) {
            best.k = k;
            best.method = ClusterMethod::kmedoids;
            best.centroids.resize(k, X.cols());
            for (int c = 0; c < k; ++c) {
                best.centroids.row(c) = X.row(medoids[c]);
            }
            assign_nearest(X, best.centroids, best.labels);
            best.distortion = cost;
        }
    }
    return best;
}

ClusterAssignment cluster_with(ClusterMethod method, const Eigen::MatrixXd& X, int k,
                               std::uint64_t seed, int restarts) {
    switch (method) {
    case ClusterMethod::kmeans:
        return kmeans(X, k, seed, restarts);
    case ClusterMethod::kmedoids:
        return kmedoids(X, k, seed, restarts);
    case ClusterMethod::kmedians:
        return kmedians(X, k, seed, restarts);
    case ClusterMethod::hierarchical: {
        const auto linkage = hierarchical_cluster(X);
        ClusterAssignment out;
        out.k = k;
        out.method = ClusterMethod::hierarchical;
        out.labels = cut_tree(linkage, k);
        out.centroids.resize(k, X.cols());
        out.centroids.setZero();
        std::vector<long> counts(k, 0);
        for (long r = 0; r < X.rows(); ++r) {
            out.centroids.row(out.labels[r]) += X.row(r);
            ++counts[out.labels[r]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                out.centroids.row(c) /= static_cast<double>(counts[c]);
            }
        }
        out.distortion = assignment_distortion(X, out.centroids, out.labels);
        return out;
    }
    }
    throw ConfigError("unknown clustering method");
}

ElbowResult elbow_from_curve(const std::vector<double>& distortions) {
    ElbowResult result;
    result.distortions = distortions;
    const int n = static_cast<int>(distortions.size());
    if (n < 3) {
        result.k = 1;
        result.no_knee = true;
        return result;
    }
    const double y_first = distortions.front();
    const double y_last = distortions.back();
    const double y_span = y_first - y_last;
    if (!(std::abs(y_span) > 0.0)) {
        result.k = 1;
        result.no_knee = true;
        return result;
    }
    // Normalize both axes so the knee choice is invariant under uniform
    // scaling of the distortions.
    double best = -1.0;
    int best_k = 1;
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / (n - 1);
        const double y = (distortions[i] - y_last) / y_span; // 1 at K=1, 0 at K=max
        const double dist = std::abs(x + y - 1.0) / std::sqrt(2.0);
        if (dist > best + 1e-12) {
            best = dist;
            best_k = i + 1;
        }
    }
    if (best <= 1e-9) {
        result.k = 1;
        result.no_knee = true;
        return result;
    }
    result.k = best_k;
    return result;
}

ElbowResult elbow_optimal_k(const Eigen::MatrixXd& X, int k_max, std::uint64_t seed,
                            int restarts) {
    check_cluster_args(X, std::max(k_max, 1));
    std::vector<double> curve;
    for (int k = 1; k <= k_max; ++k) {
        curve.push_back(kmeans(X, k, seed, restarts).distortion);
    }
    return elbow_from_curve(curve);
}

DendrogramLinkage hierarchical_cluster(const Eigen::MatrixXd& X) {
    const long p = X.rows();
    if (p < 2) {
        throw ConfigError("hierarchical clustering needs >= 2 rows");
    }
    DendrogramLinkage linkage;
    linkage.leaves = static_cast<int>(p);

    struct Active {
        int id;
        int size;
    };
    std::vector<Active> active;
    for (long r = 0; r < p; ++r) {
        active.push_back({static_cast<int>(r), 1});
    }
    // Distance matrix over active clusters (Euclidean, average linkage).
    std::vector<std::vector<double>> dist(p, std::vector<double>(p, 0.0));
    for (long a = 0; a < p; ++a) {
        for (long b = a + 1; b < p; ++b) {
            dist[a][b] = dist[b][a] = (X.row(a) - X.row(b)).norm();
        }
    }

    for (int step = 0; step < p - 1; ++step) {
        size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < active.size(); ++i) {
            for (size_t j = i + 1; j < active.size(); ++j) {
                if (dist[i][j] < best) {
                    best = dist[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        DendrogramLinkage::Merge merge;
        merge.left = active[bi].id;
        merge.right = active[bj].id;
        merge.distance = best;
        merge.size = active[bi].size + active[bj].size;
        // Average linkage (Lance-Williams) against all remaining clusters.
        const double wa = active[bi].size;
        const double wb = active[bj].size;
        for (size_t m = 0; m < active.size(); ++m) {
            if (m == bi || m == bj) {
                continue;
            }
            dist[bi][m] = dist[m][bi] = (wa * dist[bi][m] + wb * dist[bj][m]) / (wa + wb);
        }
        active[bi] = {linkage.leaves + step, merge.size};
        active.erase(active.begin() + bj);
        for (size_t m = 0; m < dist.size(); ++m) {
            dist[m].erase(dist[m].begin() + bj);
        }
        dist.erase(dist.begin() + bj);
        linkage.merges.push_back(merge);
    }
    return linkage;
}

std::vector<int> cut_tree(const DendrogramLinkage& linkage, int k) {
    const int p = linkage.leaves;
    if (k < 1 || k > p) {
        throw ConfigError("cut_tree cluster count out of range");
    }
    // Union-find over leaves; apply the first p-k merges.
    std::vector<int> parent(p);
    for (int i = 0; i < p; ++i) {
        parent[i] = i;
    }
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    // node id -> representative leaf
    std::vector<int> rep(p + linkage.merges.size());
    for (int i = 0; i < p; ++i) {
        rep[i] = i;
    }
    for (int s = 0; s < p - k; ++s) {
        const auto& m = linkage.merges[s];
        const int a = find(rep[m.left]);
        const int b = find(rep[m.right]);
        parent[b] = a;
        rep[p + s] = a;
    }
    // canonical labels ordered by first appearance
    std::vector<int> labels(p, -1);
    int next = 0;
    std::vector<int> root_label(p, -1);
    for (int i = 0; i < p; ++i) {
        const int r = find(i);
        if (root_label[r] < 0) {
            root_label[r] = next++;
        }
        labels[i] = root_label[r];
    }
    return labels;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    std::vector<std::pair<int, int>> mapping;
    for (size_t i = 0; i < a.size(); ++i) {
        bool found = false;
        for (const auto& [fa, fb] : mapping) {
            if (fa == a[i] || fb == b[i]) {
                if (fa != a[i] || fb != b[i]) {
                    return false;
                }
                found = true;
                break;
            }
        }
        if (!found) {
            mapping.emplace_back(a[i], b[i]);
        }
    }
    return true;
}

} // namespace elute
