#include "ivpinn/network.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace ivpinn {

namespace {

std::atomic<std::uint64_t> g_jacobian_calls{0};

void check_shapes(const MlpNetwork& net) {
    if (net.widths.size() < 2) throw std::invalid_argument("MlpNetwork: need at least one layer");
    if (net.widths.back() != 1) throw std::invalid_argument("MlpNetwork: output width must be 1");
    if (net.weights.size() != net.biases.size() ||
        net.weights.size() + 1 != net.widths.size())
        throw std::invalid_argument("MlpNetwork: layer count mismatch");
    for (int l = 0; l < net.n_layers(); ++l) {
        std::size_t rows = net.widths[l + 1], cols = net.widths[l];
        if (net.weights[l].size() != rows * cols || net.biases[l].size() != rows)
            throw std::invalid_argument("MlpNetwork: weight shape mismatch at layer " +
                                        std::to_string(l + 1));
    }
}

inline double act(Activation a, double z) {
    return a == Activation::tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

// First and second derivative of the activation expressed through the stored
// post-activation value x = rho(z).
inline double act_d1(Activation a, double x) {
    return a == Activation::tanh ? 1.0 - x * x : (x > 0.0 ? 1.0 : 0.0);
}

inline double act_d2(Activation a, double x) {
    return a == Activation::tanh ? -2.0 * x * (1.0 - x * x) : 0.0;
}

}  // namespace

int MlpNetwork::n_weights() const {
    int n = 0;
    for (int l = 0; l < n_layers(); ++l) n += widths[l + 1] * (widths[l] + 1);
    return n;
}

std::vector<double> MlpNetwork::to_flat() const {
    std::vector<double> flat;
    flat.reserve(n_weights());
    for (int l = 0; l < n_layers(); ++l) {
        flat.insert(flat.end(), weights[l].begin(), weights[l].end());
        flat.insert(flat.end(), biases[l].begin(), biases[l].end());
    }
    return flat;
}

void MlpNetwork::from_flat(std::span<const double> flat) {
    if (static_cast<int>(flat.size()) != n_weights())
        throw std::invalid_argument("MlpNetwork::from_flat: size mismatch");
    std::size_t pos = 0;
    for (int l = 0; l < n_layers(); ++l) {
        std::copy(flat.begin() + pos, flat.begin() + pos + weights[l].size(), weights[l].begin());
        pos += weights[l].size();
        std::copy(flat.begin() + pos, flat.begin() + pos + biases[l].size(), biases[l].begin());
        pos += biases[l].size();
    }
}

MlpNetwork init_weights(const std::vector<int>& widths, Activation activation, std::uint64_t seed) {
    MlpNetwork net;
    net.widths = widths;
    net.activation = activation;
    std::mt19937_64 rng(seed);
    auto uniform01 = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
    for (std::size_t l = 1; l < widths.size(); ++l) {
        int rows = widths[l], cols = widths[l - 1];
        double limit = std::sqrt(6.0 / (rows + cols));
        std::vector<double> a(static_cast<std::size_t>(rows) * cols);
        for (auto& v : a) v = limit * (2.0 * uniform01() - 1.0);
        net.weights.push_back(std::move(a));
        net.biases.emplace_back(rows, 0.0);
    }
    check_shapes(net);
    return net;
}

MlpNetwork build_relu_bump(double x_bar, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("build_relu_bump: h must be positive");
    MlpNetwork net;
    net.widths = {1, 3, 1};
    net.activation = Activation::relu;
    net.weights = {{1.0 / h, 1.0 / h, 1.0 / h}, {1.0 / h, -2.0 / h, 1.0 / h}};
    net.biases = {{(-x_bar + h) / h, -x_bar / h, (-x_bar - h) / h}, {0.0}};
    return net;
}

std::vector<double> mlp_forward(const MlpNetwork& net, std::span<const double> points) {
    MlpEvalCache cache;
    return mlp_forward_cached(net, points, cache, false, nullptr);
}

std::vector<double> mlp_forward_cached(const MlpNetwork& net, std::span<const double> points,
                                       MlpEvalCache& cache, bool with_jacobian,
                                       std::vector<double>* jacobians) {
    check_shapes(net);
    const int n_in = net.input_dim();
    if (points.size() % n_in != 0)
        throw std::invalid_argument("mlp_forward: point batch not a multiple of input dim");
    const int n_pts = static_cast<int>(points.size()) / n_in;
    const int L = net.n_layers();

    if (with_jacobian && net.activation == Activation::relu)
        throw std::invalid_argument("spatial derivatives are not defined for relu networks");
    if (with_jacobian) g_jacobian_calls.fetch_add(1, std::memory_order_relaxed);

    cache.n_points = n_pts;
    cache.has_tangents = with_jacobian;
    cache.activations.assign(L, {});
    cache.tangents.assign(with_jacobian ? L : 0, {});

    cache.activations[0].assign(points.begin(), points.end());
    if (with_jacobian) {
        // tangent of the identity input: t^d_0 = e_d
        auto& t0 = cache.tangents[0];
        t0.assign(static_cast<std::size_t>(n_pts) * n_in * n_in, 0.0);
        for (int p = 0; p < n_pts; ++p)
            for (int d = 0; d < n_in; ++d)
                t0[(static_cast<std::size_t>(p) * n_in + d) * n_in + d] = 1.0;
    }

    std::vector<double> values(n_pts);
    if (jacobians != nullptr) jacobians->assign(static_cast<std::size_t>(n_pts) * n_in, 0.0);

    std::vector<double> z;
    for (int l = 1; l < L; ++l) {
        const int rows = net.widths[l], cols = net.widths[l - 1];
        const auto& A = net.weights[l - 1];
        const auto& b = net.biases[l - 1];
        auto& X = cache.activations[l];
        X.assign(static_cast<std::size_t>(n_pts) * rows, 0.0);
        for (int p = 0; p < n_pts; ++p) {
            const double* xin = &cache.activations[l - 1][static_cast<std::size_t>(p) * cols];
            double* xout = &X[static_cast<std::size_t>(p) * rows];
            for (int r = 0; r < rows; ++r) {
                double s = b[r];
                const double* arow = &A[static_cast<std::size_t>(r) * cols];
                for (int c = 0; c < cols; ++c) s += arow[c] * xin[c];
                xout[r] = act(net.activation, s);
            }
        }
        if (with_jacobian) {
            auto& T = cache.tangents[l];
            T.assign(static_cast<std::size_t>(n_pts) * rows * n_in, 0.0);
            const auto& Tin = cache.tangents[l - 1];
            for (int p = 0; p < n_pts; ++p) {
                const double* xout = &X[static_cast<std::size_t>(p) * rows];
                for (int r = 0; r < rows; ++r) {
                    const double* arow = &A[static_cast<std::size_t>(r) * cols];
                    double rho1 = act_d1(net.activation, xout[r]);
                    for (int d = 0; d < n_in; ++d) {
                        double s = 0.0;
                        for (int c = 0; c < cols; ++c)
                            s += arow[c] * Tin[(static_cast<std::size_t>(p) * cols + c) * n_in + d];
                        T[(static_cast<std::size_t>(p) * rows + r) * n_in + d] = rho1 * s;
                    }
                }
            }
        }
    }

    // linear output layer
    {
        const int cols = net.widths[L - 1];
        const auto& A = net.weights[L - 1];
        const double bL = net.biases[L - 1][0];
        for (int p = 0; p < n_pts; ++p) {
            const double* xin = &cache.activations[L - 1][static_cast<std::size_t>(p) * cols];
            double s = bL;
            for (int c = 0; c < cols; ++c) s += A[c] * xin[c];
            values[p] = s;
            if (jacobians != nullptr) {
                const auto& Tin = cache.tangents[L - 1];
                for (int d = 0; d < n_in; ++d) {
                    double j = 0.0;
                    for (int c = 0; c < cols; ++c)
                        j += A[c] * Tin[(static_cast<std::size_t>(p) * cols + c) * n_in + d];
                    (*jacobians)[static_cast<std::size_t>(p) * n_in + d] = j;
                }
            }
        }
    }
    return values;
}

std::vector<double> mlp_input_jacobian(const MlpNetwork& net, std::span<const double> points) {
    MlpEvalCache cache;
    std::vector<double> jac;
    mlp_forward_cached(net, points, cache, true, &jac);
    return jac;
}

std::vector<double> mlp_weight_gradient_general(const MlpNetwork& net, const MlpEvalCache& cache,
                                                std::span<const double> cot_val,
                                                std::span<const double> cot_jac) {
    check_shapes(net);
    const int n_in = net.input_dim();
    const int n_pts = cache.n_points;
    const int L = net.n_layers();
    const bool use_val = !cot_val.empty();
    const bool use_jac = !cot_jac.empty();
    if (use_val && static_cast<int>(cot_val.size()) != n_pts)
        throw std::invalid_argument("mlp_weight_gradient: cotangent size mismatch");
    if (use_jac) {
        if (!cache.has_tangents)
            throw std::invalid_argument("mlp_weight_gradient: jacobian cotangents need a tangent cache");
        if (static_cast<int>(cot_jac.size()) != n_pts * n_in)
            throw std::invalid_argument("mlp_weight_gradient: jacobian cotangent size mismatch");
    }

    std::vector<std::vector<double>> dA(L), db(L);
    for (int l = 0; l < L; ++l) {
        dA[l].assign(net.weights[l].size(), 0.0);
        db[l].assign(net.biases[l].size(), 0.0);
    }

    // Per-point adjoint streams for the activation values (xbar) and, when
    // jacobian cotangents are present, for the input tangents (tbar, one per
    // input direction).
    std::vector<double> xbar, tbar, xbar_next, tbar_next, s_l;
    for (int p = 0; p < n_pts; ++p) {
        const int top_cols = net.widths[L - 1];
        const double* xtop = &cache.activations[L - 1][static_cast<std::size_t>(p) * top_cols];
        const double cv = use_val ? cot_val[p] : 0.0;

        // output layer: y = A_L x + b_L, jac_d = A_L t^d
        xbar.assign(top_cols, 0.0);
        if (use_jac) tbar.assign(static_cast<std::size_t>(top_cols) * n_in, 0.0);
        {
            auto& gA = dA[L - 1];
            for (int c = 0; c < top_cols; ++c) {
                gA[c] += cv * xtop[c];
                xbar[c] = cv * net.weights[L - 1][c];
            }
            db[L - 1][0] += cv;
            if (use_jac) {
                const auto& Tin = cache.tangents[L - 1];
                for (int d = 0; d < n_in; ++d) {
                    double cj = cot_jac[static_cast<std::size_t>(p) * n_in + d];
                    if (cj == 0.0) continue;
                    for (int c = 0; c < top_cols; ++c) {
                        gA[c] += cj * Tin[(static_cast<std::size_t>(p) * top_cols + c) * n_in + d];
                        tbar[static_cast<std::size_t>(c) * n_in + d] += cj * net.weights[L - 1][c];
                    }
                }
            }
        }

        for (int l = L - 1; l >= 1; --l) {
            const int rows = net.widths[l], cols = net.widths[l - 1];
            const auto& A = net.weights[l - 1];
            const double* xl = &cache.activations[l][static_cast<std::size_t>(p) * rows];
            const double* xin = &cache.activations[l - 1][static_cast<std::size_t>(p) * cols];

            // recompute s^d_l = A_l t^d_{l-1} (pre-activation tangents)
            if (use_jac) {
                s_l.assign(static_cast<std::size_t>(rows) * n_in, 0.0);
                const auto& Tin = cache.tangents[l - 1];
                for (int r = 0; r < rows; ++r) {
                    const double* arow = &A[static_cast<std::size_t>(r) * cols];
                    for (int d = 0; d < n_in; ++d) {
                        double s = 0.0;
                        for (int c = 0; c < cols; ++c)
                            s += arow[c] * Tin[(static_cast<std::size_t>(p) * cols + c) * n_in + d];
                        s_l[static_cast<std::size_t>(r) * n_in + d] = s;
                    }
                }
            }

            xbar_next.assign(cols, 0.0);
            if (use_jac) tbar_next.assign(static_cast<std::size_t>(cols) * n_in, 0.0);
            auto& gA = dA[l - 1];
            auto& gb = db[l - 1];
            for (int r = 0; r < rows; ++r) {
                double rho1 = act_d1(net.activation, xl[r]);
                double zbar = rho1 * xbar[r];
                if (use_jac) {
                    double rho2 = act_d2(net.activation, xl[r]);
                    for (int d = 0; d < n_in; ++d)
                        zbar += rho2 * s_l[static_cast<std::size_t>(r) * n_in + d] *
                                tbar[static_cast<std::size_t>(r) * n_in + d];
                }
                const double* arow = &A[static_cast<std::size_t>(r) * cols];
                double* garow = &gA[static_cast<std::size_t>(r) * cols];
                gb[r] += zbar;
                for (int c = 0; c < cols; ++c) {
                    garow[c] += zbar * xin[c];
                    xbar_next[c] += arow[c] * zbar;
                }
                if (use_jac) {
                    const auto& Tin = cache.tangents[l - 1];
                    for (int d = 0; d < n_in; ++d) {
                        double sbar = rho1 * tbar[static_cast<std::size_t>(r) * n_in + d];
                        if (sbar == 0.0) continue;
                        for (int c = 0; c < cols; ++c) {
                            garow[c] += sbar * Tin[(static_cast<std::size_t>(p) * cols + c) * n_in + d];
                            tbar_next[static_cast<std::size_t>(c) * n_in + d] += arow[c] * sbar;
                        }
                    }
                }
            }
            xbar.swap(xbar_next);
            if (use_jac) tbar.swap(tbar_next);
        }
    }

    std::vector<double> flat;
    flat.reserve(net.n_weights());
    for (int l = 0; l < L; ++l) {
        flat.insert(flat.end(), dA[l].begin(), dA[l].end());
        flat.insert(flat.end(), db[l].begin(), db[l].end());
    }
    return flat;
}

std::vector<double> mlp_weight_gradient(const MlpNetwork& net, std::span<const double> points,
                                        std::span<const double> cotangents) {
    MlpEvalCache cache;
    mlp_forward_cached(net, points, cache, false, nullptr);
    return mlp_weight_gradient_general(net, cache, cotangents, {});
}

std::vector<double> weight_gradient_of_jacobian(const MlpNetwork& net, std::span<const double> points,
                                                std::span<const double> cot_jac) {
    MlpEvalCache cache;
    mlp_forward_cached(net, points, cache, true, nullptr);
    return mlp_weight_gradient_general(net, cache, {}, cot_jac);
}

std::uint64_t jacobian_call_count() { return g_jacobian_calls.load(std::memory_order_relaxed); }

void save_network(const MlpNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_network: cannot open " + path);
    const char magic[4] = {'I', 'V', 'N', 'N'};
    out.write(magic, 4);
    auto write_u32 = [&out](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    write_u32(1);
    write_u32(net.activation == Activation::tanh ? 0 : 1);
    write_u32(static_cast<std::uint32_t>(net.widths.size()));
    for (int w : net.widths) write_u32(static_cast<std::uint32_t>(w));
    auto flat = net.to_flat();
    out.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!out) throw std::runtime_error("save_network: write failed for " + path);
}

MlpNetwork load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_network: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "IVNN", 4) != 0)
        throw std::runtime_error("load_network: bad magic in " + path);
    auto read_u32 = [&in, &path]() {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        if (!in) throw std::runtime_error("load_network: truncated file " + path);
        return v;
    };
    std::uint32_t version = read_u32();
    if (version != 1) throw std::runtime_error("load_network: unsupported version");
    std::uint32_t act_tag = read_u32();
    std::uint32_t n_sizes = read_u32();
    if (n_sizes < 2 || n_sizes > 64) throw std::runtime_error("load_network: bad layer count");
    MlpNetwork net;
    net.activation = act_tag == 0 ? Activation::tanh : Activation::relu;
    net.widths.resize(n_sizes);
    for (auto& w : net.widths) w = static_cast<int>(read_u32());
    for (int l = 0; l < net.n_layers(); ++l) {
        net.weights.emplace_back(static_cast<std::size_t>(net.widths[l + 1]) * net.widths[l]);
        net.biases.emplace_back(net.widths[l + 1]);
    }
    std::vector<double> flat(net.n_weights());
    in.read(reinterpret_cast<char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!in) throw std::runtime_error("load_network: truncated weights in " + path);
    net.from_flat(flat);
    return net;
}

}  // namespace ivpinn
