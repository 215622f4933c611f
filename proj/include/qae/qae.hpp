#pragma once

// Umbrella header for the NV-center quantum-autoencoder simulation library.

#include "qae/autoencoder.hpp"
#include "qae/config.hpp"
#include "qae/decay_fit.hpp"
#include "qae/device.hpp"
#include "qae/experiments.hpp"
#include "qae/hqca.hpp"
#include "qae/io.hpp"
#include "qae/linalg.hpp"
#include "qae/matrix.hpp"
#include "qae/rng.hpp"
#include "qae/tomography.hpp"
