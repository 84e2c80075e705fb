#include "qaefem/samplers.hpp"

#include <algorithm>
#include <cmath>

namespace qaefem {

namespace {

// bit 0 is the most significant digit
bool lex_less(const BitString& a, const BitString& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

// Symmetrized off-diagonal coupling table with zero diagonal; row-contiguous
// so the post-accept field update is a single linear pass.
std::vector<double> coupling_table(const Qubo& q) {
    std::size_t n = q.dim;
    std::vector<double> c(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = q.coeffs(i, j);
            c[i * n + j] = v;
            c[j * n + i] = v;
        }
    return c;
}

}  // namespace

SampleSet ExhaustiveSampler::minimize(const Qubo& qubo, std::uint64_t) const {
    std::size_t n = qubo.dim;
    if (n == 0) throw TooLarge("empty QUBO");
    if (n > max_dim) throw TooLarge("exhaustive enumeration beyond 26 variables");

    std::vector<double> couple = coupling_table(qubo);
    BitString q(n, 0);
    BitString best_bits = q;
    double energy = qubo.offset;
    double best_energy = energy;
    double tie_tol = 1e-12 * (1.0 + std::abs(best_energy));

    // Gray-code walk: step t flips bit ctz(t), visiting every bitstring once.
    std::uint64_t total = 1ULL << n;
    for (std::uint64_t t = 1; t < total; ++t) {
        unsigned alpha = static_cast<unsigned>(__builtin_ctzll(t));
        double field = qubo.coeffs(alpha, alpha);
        const double* row = couple.data() + static_cast<std::size_t>(alpha) * n;
        for (std::size_t j = 0; j < n; ++j)
            if (q[j]) field += row[j];
        energy += q[alpha] ? -field : field;
        q[alpha] ^= 1;
        if (energy <= best_energy + tie_tol) {
            // Re-evaluate exactly so ties are compared free of drift.
            double exact = qubo.energy(q);
            if (exact < best_energy ||
                (exact == best_energy && lex_less(q, best_bits))) {
                best_energy = exact;
                best_bits = q;
                tie_tol = 1e-12 * (1.0 + std::abs(best_energy));
            }
        }
    }

    SampleSet out;
    out.samples.push_back(Sample{std::move(best_bits), best_energy, 1});
    out.best = 0;
    return out;
}

void SaConfig::validate() const {
    if (numreads < 1) throw ConfigError("numreads must be at least 1");
    if (sweeps < 0) throw ConfigError("sweeps must be nonnegative");
    if (!(beta_min > 0.0) || !(beta_max >= beta_min))
        throw ConfigError("need 0 < beta_min <= beta_max");
}

SampleSet SaSampler::minimize(const Qubo& qubo, std::uint64_t seed) const {
    std::size_t n = qubo.dim;
    if (n == 0) throw TooLarge("empty QUBO");
    const int sweeps = config_.sweeps;
    const int numreads = config_.numreads;

    // Adjacency lists of nonzero couplings: FEM-derived QUBOs are banded, so
    // the post-accept field update touches a handful of entries, not all n.
    std::vector<double> diag(n);
    std::vector<std::size_t> adj_start(n + 1, 0);
    std::vector<std::uint32_t> adj_idx;
    std::vector<double> adj_val;
    {
        for (std::size_t i = 0; i < n; ++i) diag[i] = qubo.coeffs(i, i);
        std::vector<double> couple = coupling_table(qubo);
        std::size_t nnz = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (couple[i * n + j] != 0.0) ++nnz;
        adj_idx.reserve(nnz);
        adj_val.reserve(nnz);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double v = couple[i * n + j];
                if (v != 0.0) {
                    adj_idx.push_back(static_cast<std::uint32_t>(j));
                    adj_val.push_back(v);
                }
            }
            adj_start[i + 1] = adj_idx.size();
        }
    }

    double scale = qubo.max_abs_coeff();
    if (scale <= 0.0) scale = 1.0;
    std::vector<double> betas(static_cast<std::size_t>(std::max(sweeps, 0)));
    if (sweeps == 1) {
        betas[0] = config_.beta_min;
    } else if (sweeps > 1) {
        double mult = std::pow(config_.beta_max / config_.beta_min,
                               1.0 / (sweeps - 1));
        double b = config_.beta_min;
        for (int s = 0; s < sweeps; ++s, b *= mult) betas[s] = b;
    }

    SampleSet out;
    out.samples.reserve(numreads);
    std::vector<double> h(n);
    std::vector<std::uint32_t> perm(n);
    BitString q(n), best_bits(n);

    for (int read = 0; read < numreads; ++read) {
        SplitMix64 init(mix_seed(seed, static_cast<std::uint64_t>(read), 0));
        for (std::size_t i = 0; i < n; ++i) q[i] = init.next() & 1u;

        // Local fields h[a] = C_aa + sum_b couple[a][b] q_b; independent of
        // q_a, so dE(flip a) = (1 - 2 q_a) h[a].
        for (std::size_t a = 0; a < n; ++a) {
            double f = diag[a];
            for (std::size_t k = adj_start[a]; k < adj_start[a + 1]; ++k)
                if (q[adj_idx[k]]) f += adj_val[k];
            h[a] = f;
        }
        double energy = qubo.energy(q);
        double best_energy = energy;
        best_bits = q;

        for (int s = 0; s < sweeps; ++s) {
            SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(read),
                                    static_cast<std::uint64_t>(s) + 1));
            double beta_over_scale = betas[s] / scale;
            // Above this step the acceptance probability drops below the
            // uniform draw's 53-bit resolution, so reject without sampling.
            double certain_reject = 37.0 / beta_over_scale;
            for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
            for (std::size_t i = n; i > 1; --i) {
                std::size_t j = rng.below(i);
                std::swap(perm[i - 1], perm[j]);
            }
            for (std::size_t pi = 0; pi < n; ++pi) {
                std::size_t a = perm[pi];
                double de = q[a] ? -h[a] : h[a];
                if (de > 0.0) {
                    if (de > certain_reject) continue;
                    if (rng.uniform() >= std::exp(-beta_over_scale * de))
                        continue;
                }
                double sgn = q[a] ? -1.0 : 1.0;
                q[a] ^= 1;
                energy += de;
                for (std::size_t k = adj_start[a]; k < adj_start[a + 1]; ++k)
                    h[adj_idx[k]] += sgn * adj_val[k];
                if (energy < best_energy) {
                    best_energy = energy;
                    best_bits = q;
                }
            }
        }
        if (config_.polish) {
            // Steepest single-bit descent from the walker's end state; the
            // anneal's cold tail leaves it near a basin floor and the greedy
            // pass lands it exactly on the local minimum.
            bool improved = true;
            while (improved) {
                improved = false;
                for (std::size_t a = 0; a < n; ++a) {
                    double de = q[a] ? -h[a] : h[a];
                    if (de < 0.0) {
                        double sgn = q[a] ? -1.0 : 1.0;
                        q[a] ^= 1;
                        energy += de;
                        for (std::size_t k = adj_start[a]; k < adj_start[a + 1]; ++k)
                            h[adj_idx[k]] += sgn * adj_val[k];
                        if (energy < best_energy) {
                            best_energy = energy;
                            best_bits = q;
                        }
                        improved = true;
                    }
                }
            }
        }
        out.samples.push_back(Sample{best_bits, qubo.energy(best_bits), 1});
    }

    out.best = 0;
    for (std::size_t i = 1; i < out.samples.size(); ++i)
        if (out.samples[i].energy < out.samples[out.best].energy) out.best = i;
    return out;
}

void IceConfig::validate() const {
    if (sigma_eta < 0.0) throw ConfigError("sigma_eta must be nonnegative");
}

Qubo ice_perturb(const Qubo& qubo, double sigma_eta, std::uint64_t noise_seed) {
    Qubo noisy = qubo;
    double scale = qubo.max_abs_coeff();
    SplitMix64 rng(noise_seed);
    for (std::size_t i = 0; i < qubo.dim; ++i)
        for (std::size_t j = i; j < qubo.dim; ++j)
            noisy.coeffs(i, j) += sigma_eta * rng.normal() * scale;
    return noisy;
}

SampleSet IceSampler::minimize(const Qubo& qubo, std::uint64_t seed) const {
    if (config_.sigma_eta == 0.0) return inner_->minimize(qubo, seed);
    Qubo noisy = ice_perturb(qubo, config_.sigma_eta, mix_seed(seed, 0x1cee));
    SampleSet raw = inner_->minimize(noisy, mix_seed(seed, 0x5a));
    // The argmin is whatever the inner sampler picked on the perturbed
    // landscape; only the reported energies are trued up, so downstream sign
    // tests see honest energies of possibly-wrong minimizers.
    for (auto& s : raw.samples) s.energy = qubo.energy(s.bits);
    return raw;
}

nlohmann::json remote_request(const Qubo& qubo, int numreads,
                              double annealing_time_us) {
    if (numreads < 1) throw ConfigError("numreads must be at least 1");
    if (annealing_time_us <= 0.0)
        throw ConfigError("annealing time must be positive");
    return {{"qubo", to_json(qubo)},
            {"numreads", numreads},
            {"annealing_time_us", annealing_time_us}};
}

SampleSet parse_remote_response(const nlohmann::json& response, const Qubo& qubo) {
    SampleSet out;
    for (const auto& s : response.at("samples")) {
        Sample sample;
        sample.bits = s.at("bits").get<BitString>();
        if (sample.bits.size() != qubo.dim)
            throw LengthMismatch("remote sample length does not match QUBO");
        for (auto b : sample.bits)
            if (b > 1) throw ConfigError("remote sample bits must be 0 or 1");
        sample.occurrences = s.value("occurrences", 1);
        sample.energy = qubo.energy(sample.bits);
        out.samples.push_back(std::move(sample));
    }
    if (out.samples.empty()) throw ConfigError("remote response carried no samples");
    out.best = 0;
    for (std::size_t i = 1; i < out.samples.size(); ++i)
        if (out.samples[i].energy < out.samples[out.best].energy) out.best = i;
    return out;
}

}  // namespace qaefem
