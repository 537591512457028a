#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ivpinn {

enum class Activation { tanh, relu };

/// Fully-connected feed-forward network. Layer l maps N_{l-1} -> N_l through
/// x_l = rho(A_l x_{l-1} + b_l); the last layer is linear with one output.
struct MlpNetwork {
    std::vector<int> widths;  // N_0 .. N_L, with N_L == 1
    Activation activation = Activation::tanh;
    std::vector<std::vector<double>> weights;  // A_l, row-major N_l x N_{l-1}
    std::vector<std::vector<double>> biases;   // b_l

    int input_dim() const { return widths.front(); }
    int n_layers() const { return static_cast<int>(widths.size()) - 1; }
    int n_weights() const;
    std::vector<double> to_flat() const;
    void from_flat(std::span<const double> flat);
};

/// Glorot-uniform weights, zero biases, reproducible per seed.
MlpNetwork init_weights(const std::vector<int>& widths, Activation activation, std::uint64_t seed);

/// One-input ReLU network with a single hidden layer of three neurons
/// realizing the hat function with peak 1/h at x_bar and support
/// (x_bar - h, x_bar + h).
MlpNetwork build_relu_bump(double x_bar, double h);

/// Forward/backward scratch shared between a forward pass and the weight
/// gradient computed from it. Activations (and input tangents, when spatial
/// derivatives were requested) are stored per layer for the whole batch.
struct MlpEvalCache {
    int n_points = 0;
    bool has_tangents = false;
    std::vector<std::vector<double>> activations;  // per layer 0..L-1: n_points x N_l
    std::vector<std::vector<double>> tangents;     // per layer 0..L-1: n_points x N_l x n_in
};

/// Batched evaluation; points are flat with stride input_dim.
std::vector<double> mlp_forward(const MlpNetwork& net, std::span<const double> points);

/// Forward pass retaining the cache; optionally also computes the spatial
/// jacobian (jacobians: n_points x input_dim, flat) via forward-mode tangents.
std::vector<double> mlp_forward_cached(const MlpNetwork& net, std::span<const double> points,
                                       MlpEvalCache& cache, bool with_jacobian,
                                       std::vector<double>* jacobians);

/// d/dx of the network output at each point (tanh only).
std::vector<double> mlp_input_jacobian(const MlpNetwork& net, std::span<const double> points);

/// Gradient with respect to every weight of
///   sum_p [ cot_val[p] * w(x_p) + sum_d cot_jac[p*n_in+d] * dw/dx_d(x_p) ].
/// Either cotangent span may be empty. cot_jac requires a cache built with
/// with_jacobian = true.
std::vector<double> mlp_weight_gradient_general(const MlpNetwork& net, const MlpEvalCache& cache,
                                                std::span<const double> cot_val,
                                                std::span<const double> cot_jac);

std::vector<double> mlp_weight_gradient(const MlpNetwork& net, std::span<const double> points,
                                        std::span<const double> cotangents);

std::vector<double> weight_gradient_of_jacobian(const MlpNetwork& net, std::span<const double> points,
                                                std::span<const double> cot_jac);

/// Number of spatial-derivative evaluations since process start; the
/// interpolated training path must leave it unchanged.
std::uint64_t jacobian_call_count();

// Checkpoint format: magic "IVNN", u32 version, u32 activation, u32 layer
// count, u32 widths, then the flat f64 weight vector; little-endian.
void save_network(const MlpNetwork& net, const std::string& path);
MlpNetwork load_network(const std::string& path);

}  // namespace ivpinn
