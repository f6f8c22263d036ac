#pragma once

#define SKEWFRONT_VERSION "0.1.0"
