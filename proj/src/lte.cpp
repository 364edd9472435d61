#include "cfp/lte.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cfp/rng.hpp"

namespace cfp {

namespace {
constexpr double kLn2 = 0.69314718055994530942;
}

double hata_path_loss_db(const HataParams& p, double distance_m) {
    const double d_km = std::max(distance_m, p.d_min_m) / 1000.0;
    const double lf = std::log10(p.f_mhz);
    const double a_hm = (1.1 * lf - 0.7) * p.h_m_m - (1.56 * lf - 0.8);
    return 69.55 + 26.16 * lf - 13.82 * std::log10(p.h_b_m) - a_hm +
           (44.9 - 6.55 * std::log10(p.h_b_m)) * std::log10(d_km);
}

double hata_gain(const HataParams& p, double distance_m) {
    return std::pow(10.0, -hata_path_loss_db(p, distance_m) / 10.0);
}

std::vector<std::vector<Index>> NetworkScenario::users_of() const {
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(n_stations()));
    for (Index j = 0; j < n_users(); ++j) {
        const Index i = assignment[static_cast<std::size_t>(j)];
        if (i >= 0) out[static_cast<std::size_t>(i)].push_back(j);
    }
    return out;
}

void NetworkScenario::validate() const {
    const Index m = n_stations();
    const Index n = n_users();
    if (m < 1 || n < 1) throw FormatError("scenario needs at least one station and user");
    if (bs_pos.rows() != m || bs_pos.cols() != 2) throw FormatError("bad bs_pos shape");
    if (user_pos.rows() != n || user_pos.cols() != 2)
        throw FormatError("bad user_pos shape");
    if (static_cast<Index>(assignment.size()) != n)
        throw FormatError("assignment size mismatch");
    if (demand_bps.size() != n || power_w.size() != m)
        throw FormatError("demand/power size mismatch");
    if (k_ru < 1) throw FormatError("k_ru must be >= 1");
    if (!(bandwidth_hz > 0.0) || !(noise_w > 0.0))
        throw FormatError("bandwidth and noise must be positive");
    if (!(gains.minCoeff() > 0.0)) throw FormatError("gains must be positive");
    if (!(demand_bps.minCoeff() > 0.0)) throw FormatError("demands must be positive");
    if (!(power_w.minCoeff() > 0.0)) throw FormatError("powers must be positive");
    for (Index j = 0; j < n; ++j) {
        const Index i = assignment[static_cast<std::size_t>(j)];
        if (i < -1 || i >= m) throw FormatError("assignment index out of range");
    }
}

double noise_power_w(double psd_dbm_hz, double bandwidth_hz) {
    return std::pow(10.0, (psd_dbm_hz - 30.0) / 10.0) * bandwidth_hz;
}

NetworkScenario generate_scenario(const ScenarioParams& params, std::uint64_t seed) {
    if (params.n_stations < 1 || params.n_users < 1)
        throw Error("scenario needs at least one station and user");

    NetworkScenario scn;
    const Index m = params.n_stations;
    const Index n = params.n_users;
    scn.k_ru = params.k_ru;
    scn.bandwidth_hz = params.system_bandwidth_hz / params.k_ru;
    scn.noise_w = noise_power_w(params.noise_psd_dbm_hz, scn.bandwidth_hz);
    scn.demand_bps = Vector::Constant(n, params.demand_bps);
    scn.power_w = Vector::Constant(m, params.power_w);

    scn.bs_pos = Matrix(m, 2);
    SplitStream rng(seed, 0);
    if (params.random_bs) {
        for (Index i = 0; i < m; ++i) {
            scn.bs_pos(i, 0) = rng.uniform(0.0, params.field_m);
            scn.bs_pos(i, 1) = rng.uniform(0.0, params.field_m);
        }
    } else {
        const Index cols = static_cast<Index>(std::ceil(std::sqrt(double(m))));
        const Index rows = (m + cols - 1) / cols;
        const double cw = params.field_m / static_cast<double>(cols);
        const double ch = params.field_m / static_cast<double>(rows);
        for (Index i = 0; i < m; ++i) {
            const Index r = i / cols;
            const Index c = i % cols;
            scn.bs_pos(i, 0) = (static_cast<double>(c) + 0.5) * cw;
            scn.bs_pos(i, 1) = (static_cast<double>(r) + 0.5) * ch;
        }
    }

    scn.user_pos = Matrix(n, 2);
    SplitStream urng(seed, 1);
    for (Index j = 0; j < n; ++j) {
        scn.user_pos(j, 0) = urng.uniform(0.0, params.field_m);
        scn.user_pos(j, 1) = urng.uniform(0.0, params.field_m);
    }

    scn.gains = Matrix(m, n);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j) {
            const double dx = scn.bs_pos(i, 0) - scn.user_pos(j, 0);
            const double dy = scn.bs_pos(i, 1) - scn.user_pos(j, 1);
            scn.gains(i, j) = hata_gain(params.hata, std::hypot(dx, dy));
        }

    scn.assignment.assign(static_cast<std::size_t>(n), -1);
    return associate_users(std::move(scn));
}

NetworkScenario associate_users(NetworkScenario scn) {
    const Index m = scn.n_stations();
    const Index n = scn.n_users();
    scn.assignment.assign(static_cast<std::size_t>(n), -1);
    for (Index j = 0; j < n; ++j) {
        Index best = 0;
        for (Index i = 1; i < m; ++i)
            if (scn.gains(i, j) > scn.gains(best, j)) best = i;  // ties keep lowest index
        scn.assignment[static_cast<std::size_t>(j)] = best;
    }
    return scn;
}

ReducedScenario drop_empty_stations(const NetworkScenario& scn) {
    const auto attached = scn.users_of();
    ReducedScenario out;
    for (Index i = 0; i < scn.n_stations(); ++i)
        if (!attached[static_cast<std::size_t>(i)].empty()) out.kept.push_back(i);

    const Index m = static_cast<Index>(out.kept.size());
    if (m == 0) throw EmptyCell("no station has any attached user");

    NetworkScenario& r = out.scenario;
    r.k_ru = scn.k_ru;
    r.bandwidth_hz = scn.bandwidth_hz;
    r.noise_w = scn.noise_w;
    r.demand_bps = scn.demand_bps;
    r.user_pos = scn.user_pos;
    r.bs_pos = Matrix(m, 2);
    r.power_w = Vector(m);
    r.gains = Matrix(m, scn.n_users());
    std::vector<Index> remap(static_cast<std::size_t>(scn.n_stations()), -1);
    for (Index ii = 0; ii < m; ++ii) {
        const Index i = out.kept[static_cast<std::size_t>(ii)];
        remap[static_cast<std::size_t>(i)] = ii;
        r.bs_pos.row(ii) = scn.bs_pos.row(i);
        r.power_w[ii] = scn.power_w[i];
        r.gains.row(ii) = scn.gains.row(i);
    }
    r.assignment.resize(static_cast<std::size_t>(scn.n_users()));
    for (Index j = 0; j < scn.n_users(); ++j) {
        const Index i = scn.assignment[static_cast<std::size_t>(j)];
        r.assignment[static_cast<std::size_t>(j)] = (i >= 0) ? remap[static_cast<std::size_t>(i)] : -1;
    }
    return out;
}

namespace {

/// omega_{i,j} with explicit power vector (the load mapping fixes p from the
/// scenario; the power mapping varies it).
double rate(const NetworkScenario& scn, const Vector& load, const Vector& p, Index i,
            Index j) {
    double interference = 0.0;
    for (Index k = 0; k < scn.n_stations(); ++k) {
        if (k == i) continue;
        interference += load[k] * p[k] * scn.gains(k, j);
    }
    const double sinr = p[i] * scn.gains(i, j) / (interference + scn.noise_w);
    return scn.bandwidth_hz * std::log1p(sinr) / kLn2;
}

std::vector<std::vector<Index>> attached_or_throw(const NetworkScenario& scn) {
    auto attached = scn.users_of();
    for (Index i = 0; i < scn.n_stations(); ++i) {
        if (attached[static_cast<std::size_t>(i)].empty()) {
            throw EmptyCell("station " + std::to_string(i) +
                            " has no attached users; drop_empty_stations first");
        }
    }
    return attached;
}

}  // namespace

double rate_per_ru(const NetworkScenario& scn, const Vector& load, Index i, Index j) {
    if (load.size() != scn.n_stations()) throw Error("load vector dimension mismatch");
    if (i < 0 || i >= scn.n_stations() || j < 0 || j >= scn.n_users())
        throw Error("rate_per_ru: index out of range");
    return rate(scn, load, scn.power_w, i, j);
}

PositiveConcaveMapping load_mapping(const NetworkScenario& scn, double load_cap) {
    scn.validate();
    if (!(load_cap > 0.0)) throw Error("load cap must be positive");
    const auto attached = attached_or_throw(scn);
    const Index m = scn.n_stations();
    const double k_ru = static_cast<double>(scn.k_ru);

    NetworkScenario local = scn;  // immutable copy owned by the mapping
    auto eval = [local = std::move(local), attached, k_ru](const Vector& nu) {
        Vector out(local.n_stations());
        for (Index i = 0; i < local.n_stations(); ++i) {
            double sum = 0.0;
            for (Index j : attached[static_cast<std::size_t>(i)])
                sum += local.demand_bps[j] / (k_ru * rate(local, nu, local.power_w, i, j));
            out[i] = sum;
        }
        return out;
    };
    return PositiveConcaveMapping(m, std::move(eval), Vector::Constant(m, load_cap));
}

PositiveConcaveMapping power_mapping(const NetworkScenario& scn, Vector load,
                                     double power_cap) {
    scn.validate();
    if (load.size() != scn.n_stations()) throw Error("load vector dimension mismatch");
    if (!(load.minCoeff() > 0.0)) throw Error("demanded load must be positive");
    if (!(power_cap > 0.0)) throw Error("power cap must be positive");
    const auto attached = attached_or_throw(scn);
    const Index m = scn.n_stations();
    const double k_ru = static_cast<double>(scn.k_ru);

    NetworkScenario local = scn;
    auto eval = [local = std::move(local), attached, nu = std::move(load),
                 k_ru](const Vector& p) {
        Vector out(local.n_stations());
        for (Index i = 0; i < local.n_stations(); ++i) {
            double sum = 0.0;
            if (p[i] != 0.0) {
                for (Index j : attached[static_cast<std::size_t>(i)])
                    sum += local.demand_bps[j] / (k_ru * rate(local, nu, p, i, j));
                out[i] = p[i] / nu[i] * sum;
            } else {
                for (Index j : attached[static_cast<std::size_t>(i)]) {
                    double interference = 0.0;
                    for (Index k = 0; k < local.n_stations(); ++k) {
                        if (k == i) continue;
                        interference += nu[k] * p[k] * local.gains(k, j);
                    }
                    sum += local.demand_bps[j] * kLn2 * (interference + local.noise_w) /
                           (k_ru * local.bandwidth_hz * local.gains(i, j) * nu[i]);
                }
                out[i] = sum;
            }
        }
        return out;
    };
    return PositiveConcaveMapping(m, std::move(eval), Vector::Constant(m, power_cap));
}

NonNegMatrix closed_form_mprime(const NetworkScenario& scn) {
    scn.validate();
    const auto attached = attached_or_throw(scn);
    const Index m = scn.n_stations();
    const double kb = static_cast<double>(scn.k_ru) * scn.bandwidth_hz;
    Matrix mp = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index k = 0; k < m; ++k) {
            if (i == k) continue;
            double sum = 0.0;
            for (Index j : attached[static_cast<std::size_t>(i)])
                sum += kLn2 * scn.demand_bps[j] * scn.gains(k, j) / (kb * scn.gains(i, j));
            mp(i, k) = sum;
        }
    return NonNegMatrix(std::move(mp));
}

NonNegMatrix power_scaled_bound(const NonNegMatrix& mprime, const Vector& p) {
    return NonNegMatrix(diagonal_similarity(mprime.entries(), p));
}

NonNegMatrix load_scaled_bound(const NonNegMatrix& mprime, const Vector& nu) {
    return NonNegMatrix(diagonal_similarity(mprime.entries(), nu));
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows, Index cols_expected = -1) {
    if (!rows.is_array() || rows.empty()) throw FormatError("expected a matrix");
    const Index r = static_cast<Index>(rows.size());
    const Index c = static_cast<Index>(rows[0].size());
    if (cols_expected >= 0 && c != cols_expected)
        throw FormatError("matrix column count mismatch");
    Matrix out(r, c);
    for (Index i = 0; i < r; ++i) {
        if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != c)
            throw FormatError("ragged matrix rows");
        for (Index k = 0; k < c; ++k)
            out(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]
                            .get<double>();
    }
    return out;
}

}  // namespace

void save_scenario(const NetworkScenario& scn, const std::string& path) {
    scn.validate();
    nlohmann::json j;
    j["format"] = "cfp-scenario-v1";
    j["k_ru"] = scn.k_ru;
    j["bandwidth_hz"] = scn.bandwidth_hz;
    j["noise_w"] = scn.noise_w;
    j["stations"]["pos"] = matrix_to_json(scn.bs_pos);
    j["stations"]["power_w"] = std::vector<double>(scn.power_w.begin(), scn.power_w.end());
    j["users"]["pos"] = matrix_to_json(scn.user_pos);
    j["users"]["demand_bps"] =
        std::vector<double>(scn.demand_bps.begin(), scn.demand_bps.end());
    j["users"]["station"] = scn.assignment;
    j["gains"] = matrix_to_json(scn.gains);

    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << j.dump(1) << "\n";
    if (!f) throw IoError("write failed: " + path);
}

NetworkScenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad scenario JSON in " + path + ": " + e.what());
    }
    try {
        if (j.at("format") != "cfp-scenario-v1")
            throw FormatError("unsupported scenario format in " + path);
        NetworkScenario scn;
        scn.k_ru = j.at("k_ru").get<int>();
        scn.bandwidth_hz = j.at("bandwidth_hz").get<double>();
        scn.noise_w = j.at("noise_w").get<double>();
        scn.bs_pos = matrix_from_json(j.at("stations").at("pos"), 2);
        scn.user_pos = matrix_from_json(j.at("users").at("pos"), 2);
        scn.gains = matrix_from_json(j.at("gains"));
        const auto pw = j.at("stations").at("power_w").get<std::vector<double>>();
        const auto db = j.at("users").at("demand_bps").get<std::vector<double>>();
        scn.power_w = Eigen::Map<const Vector>(pw.data(), static_cast<Index>(pw.size()));
        scn.demand_bps = Eigen::Map<const Vector>(db.data(), static_cast<Index>(db.size()));
        scn.assignment = j.at("users").at("station").get<std::vector<Index>>();
        scn.validate();
        return scn;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad scenario JSON in " + path + ": " + e.what());
    }
}

void save_gains_csv(const NetworkScenario& scn, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    char buf[40];
    for (Index i = 0; i < scn.n_stations(); ++i)
        for (Index j = 0; j < scn.n_users(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", scn.gains(i, j));
            f << buf << (j + 1 < scn.n_users() ? "," : "\n");
        }
    if (!f) throw IoError("write failed: " + path);
}

}  // namespace cfp
