// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rainsynth/config.hpp"
#include "rainsynth/dataset.hpp"
#include "rainsynth/errors.hpp"
#include "rainsynth/face_crop.hpp"
#include "rainsynth/image.hpp"
#include "rainsynth/io.hpp"
#include "rainsynth/losses.hpp"
#include "rainsynth/metrics.hpp"
#include "rainsynth/rain_model.hpp"
#include "rainsynth/rng.hpp"
#include "rainsynth/serialization.hpp"
#include "rainsynth/synthetic_faces.hpp"
