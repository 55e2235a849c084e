#pragma once

#include <bsl/error.hpp>
#include <bsl/spectral_field.hpp>
#include <bsl/multiplier.hpp>
#include <bsl/ifrk.hpp>
#include <bsl/linear_mode.hpp>
#include <bsl/profile.hpp>
#include <bsl/admissibility.hpp>
#include <bsl/coupled.hpp>
#include <bsl/fft.hpp>
#include <bsl/bootstrap.hpp>
#include <bsl/nonlinear.hpp>
#include <bsl/harness/table.hpp>
#include <bsl/harness/config.hpp>
#include <bsl/harness/threshold.hpp>
#include <bsl/harness/experiment.hpp>
