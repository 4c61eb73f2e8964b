#pragma once

// Umbrella header.
#include "mfa/anneal.hpp"
#include "mfa/baseline.hpp"
#include "mfa/convolve.hpp"
#include "mfa/error.hpp"
#include "mfa/image.hpp"
#include "mfa/image_io.hpp"
#include "mfa/log.hpp"
#include "mfa/metrics.hpp"
#include "mfa/noise_model.hpp"
#include "mfa/phantom.hpp"
#include "mfa/psf.hpp"
#include "mfa/text_format.hpp"
