#pragma once

#include "fallsentry/error.hpp"
#include "fallsentry/pose_stream.hpp"
#include "fallsentry/geometry.hpp"
#include "fallsentry/fall_detector.hpp"
#include "fallsentry/evaluation.hpp"
#include "fallsentry/synth.hpp"
#include "fallsentry/pipeline.hpp"
