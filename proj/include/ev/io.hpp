// io.hpp
//
// Serialization helpers: 12-significant-digit rounding for reproducible
// output files, the ZeroSet JSON schema, and small CSV utilities.

#ifndef EV_IO_HPP
#define EV_IO_HPP

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ev/zeros.hpp"

namespace ev {

// Round through a %.12g print so serialized numbers are platform-stable.
inline double round12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::stod(buf);
}

inline std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline nlohmann::ordered_json zeroset_to_json(const ZeroSet& zs, const SpinChainModel& model,
                                              const std::string& state_name) {
    nlohmann::ordered_json j;
    j["N"] = zs.n;
    j["tau_im"] = round12(model.params.tau.imag());
    j["eta_re"] = round12(model.params.eta.real());
    j["eta_im"] = round12(model.params.eta.imag());
    j["twist"] = std::string(1, twist_char(model.twist));
    j["state"] = state_name;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (int i = 0; i < zs.n; ++i) {
        nlohmann::ordered_json z;
        z["re"] = round12(zs.zeros[static_cast<size_t>(i)].real());
        z["im"] = round12(zs.zeros[static_cast<size_t>(i)].imag());
        z["label"] = zs.labels.empty() ? "unclassified"
                                       : zero_label_name(zs.labels[static_cast<size_t>(i)]);
        arr.push_back(std::move(z));
    }
    j["zeros"] = std::move(arr);
    j["M1"] = zs.m1;
    j["M2"] = zs.m2;
    double rmax = 0.0;
    for (double r : zs.residuals) rmax = std::max(rmax, r);
    j["residual_max"] = round12(rmax);
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
}

} // namespace ev

#endif // EV_IO_HPP
