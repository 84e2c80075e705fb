#ifndef QAEFEM_SAMPLERS_HPP
#define QAEFEM_SAMPLERS_HPP

#include <cstdint>
#include <memory>

#include <json.hpp>

#include "qaefem/qubobox.hpp"

namespace qaefem {

struct Sample {
    BitString bits;
    double energy = 0.0;
    int occurrences = 1;
};

/// Samples in submission order; `best` is the index of the lowest energy
/// (first occurrence on ties).
struct SampleSet {
    std::vector<Sample> samples;
    std::size_t best = 0;

    const Sample& best_sample() const { return samples.at(best); }
};

/// Minimizer over bitstrings.  Implementations must be deterministic
/// functions of (qubo, seed).
class Sampler {
  public:
    virtual ~Sampler() = default;
    virtual SampleSet minimize(const Qubo& qubo, std::uint64_t seed) const = 0;
};

/// Exact minimizer by full enumeration (Gray-code incremental energies).
/// Ties resolve to the lexicographically smallest bitstring, bit 0 most
/// significant.  Throws TooLarge above 26 variables.
class ExhaustiveSampler : public Sampler {
  public:
    static constexpr std::size_t max_dim = 26;
    SampleSet minimize(const Qubo& qubo, std::uint64_t seed) const override;
};

/// Simulated annealing schedule and restart counts.
struct SaConfig {
    int numreads = 1000;
    int sweeps = 100;
    double beta_min = 0.1;
    double beta_max = 100.0;
    // Finish each read with steepest single-bit descent to its local
    // minimum, so restarts count basins instead of depth.
    bool polish = true;

    void validate() const;
};

/// Single-bit-flip Metropolis annealer.
///
/// Each read starts from a random bitstring, then runs `sweeps` full sweeps;
/// a sweep proposes every variable once in a fresh random permutation.  The
/// inverse temperature rises geometrically from beta_min to beta_max with
/// multiplier (beta_max/beta_min)^(1/(sweeps-1)), and energies are rescaled
/// by |Q_max| so the schedule is instance-independent.  Streams are keyed by
/// (seed, read, sweep) through splitmix64: the initial bitstring uses sweep
/// key 0 and sweep s uses key s+1, so every read and sweep is reproducible
/// in isolation.  Each read reports the best configuration seen (after the
/// optional greedy polish), with its energy re-evaluated exactly.
class SaSampler : public Sampler {
  public:
    explicit SaSampler(SaConfig config = {}) : config_(config) { config_.validate(); }
    const SaConfig& config() const { return config_; }
    SampleSet minimize(const Qubo& qubo, std::uint64_t seed) const override;

  private:
    SaConfig config_;
};

/// Integrated-control-error model parameters: each submitted coefficient is
/// offset by eta * |Q_max| with eta ~ N(0, sigma_eta).
struct IceConfig {
    double sigma_eta = 0.0;

    void validate() const;
};

/// The perturbed QUBO a noisy device would receive: every upper-triangle
/// coefficient (structural zeros included) gets an independent Gaussian
/// offset scaled by |Q_max|.  The offset is bookkeeping and stays exact.
Qubo ice_perturb(const Qubo& qubo, double sigma_eta, std::uint64_t noise_seed);

/// Wraps another sampler with the ICE model: one perturbation per
/// submission, inner sampler runs on the perturbed QUBO, recorded energies
/// are re-evaluated against the unperturbed one (best re-selected
/// accordingly).  sigma_eta = 0 is bit-for-bit the inner sampler.
class IceSampler : public Sampler {
  public:
    IceSampler(std::shared_ptr<const Sampler> inner, IceConfig config)
        : inner_(std::move(inner)), config_(config) {
        config_.validate();
    }
    SampleSet minimize(const Qubo& qubo, std::uint64_t seed) const override;

  private:
    std::shared_ptr<const Sampler> inner_;
    IceConfig config_;
};

/// Wire format for a remote annealing service (serialization only; no
/// transport).  Request: {"qubo": ..., "numreads": n, "annealing_time_us": t}.
/// Response: {"samples": [{"bits": [...], "energy": e, "occurrences": n}]}.
/// Parsed energies are re-evaluated locally against `qubo`.
nlohmann::json remote_request(const Qubo& qubo, int numreads,
                              double annealing_time_us);
SampleSet parse_remote_response(const nlohmann::json& response, const Qubo& qubo);

}  // namespace qaefem

#endif
