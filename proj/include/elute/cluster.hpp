#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace elute {

enum class ClusterMethod { kmeans, kmedoids, kmedians, hierarchical };

std::string cluster_method_name(ClusterMethod m);

struct ClusterAssignment {
    int k = 0;
    Eigen::MatrixXd centroids; // k x q (medoid rows for k-medoids)
    std::vector<int> labels;   // one cluster per row of X
    double distortion = 0.0;   // sum of squared distances to assigned centroid
    ClusterMethod method = ClusterMethod::kmeans;
    bool reseeded_empty_cluster = false;

    std::vector<std::vector<int>> members() const;
};

/// Sum of squared Euclidean distances of rows to their assigned centroids.
double distortion(const Eigen::MatrixXd& X, const ClusterAssignment& assignment);
/// Distortion plus lambda * K; exposed but unused by default.
double penalized_distortion(const Eigen::MatrixXd& X, const ClusterAssignment& assignment,
                            double lambda);

/// Lloyd iterations from a k-means++ seeding; deterministic for a fixed seed,
/// best of `restarts` kept. An emptied cluster is re-seeded at the point
/// farthest from its centroid (flagged in the result).
ClusterAssignment kmeans(const Eigen::MatrixXd& X, int k, std::uint64_t seed,
                         int restarts = 10);

/// PAM-style swap descent with squared Euclidean distance; prototypes are
/// always data rows.
ClusterAssignment kmedoids(const Eigen::MatrixXd& X, int k, std::uint64_t seed,
                           int restarts = 10);

/// Assignment by squared Euclidean distance, coordinate-wise median update.
ClusterAssignment kmedians(const Eigen::MatrixXd& X, int k, std::uint64_t seed,
                           int restarts = 10);

ClusterAssignment cluster_with(ClusterMethod method, const Eigen::MatrixXd& X, int k,
                               std::uint64_t seed, int restarts = 10);

struct ElbowResult {
    int k = 1;
    std::vector<double> distortions; // indexed by K-1 over the scanned range
    bool no_knee = false;
};

/// Distortion-curve knee via maximum perpendicular distance from the chord of
/// the endpoint-normalized curve (scale invariant); ties break to smaller K.
ElbowResult elbow_optimal_k(const Eigen::MatrixXd& X, int k_max, std::uint64_t seed,
                            int restarts = 10);
ElbowResult elbow_from_curve(const std::vector<double>& distortions);

struct DendrogramLinkage {
    struct Merge {
        int left = 0;   // node ids: 0..p-1 leaves, p+i for the i-th merge
        int right = 0;
        double distance = 0.0;
        int size = 0; // members in the merged cluster
    };
    int leaves = 0;
    std::vector<Merge> merges; // p-1 records, non-decreasing distances
};

/// Agglomerative clustering, average linkage on Euclidean distances.
DendrogramLinkage hierarchical_cluster(const Eigen::MatrixXd& X);

/// Partition obtained by stopping the merge sequence at k clusters.
std::vector<int> cut_tree(const DendrogramLinkage& linkage, int k);

/// True when two label vectors induce the same partition.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b);

} // namespace elute
