#pragma once

#include "tsnsynth/model.hpp"
#include "tsnsynth/toolkit.hpp"

namespace fixtures {

/// Four end systems, two switches, one application t1..t4 with 50 B streams
/// s1 (ES1 -> ES3) and s2 (ES2 -> ES3, ES4, two copies), 10 Mbit/s links,
/// 16 B keys and MACs, 10 us hashes, period 1000 us. Unexpanded.
tsnsynth::SystemModel motivational(bool security = true, bool redundancy = true);

/// Expanded with P_int bound; throws if no interval fits.
tsnsynth::SystemModel prepared(tsnsynth::SystemModel m);

/// Two end systems joined through one switch at the given speed.
tsnsynth::ModelBuilder line(tsnsynth::Rational speed, tsnsynth::Micros hash_time = 10);

}  // namespace fixtures
