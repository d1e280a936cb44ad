#include "unmix/synth.hpp"

namespace unmix::detail {

// Curated laboratory-style reflectance table, 224 samples x 4 materials
// (vegetation, soil, water, carbonate). Mirrors assets/spectra4_224.csv.
extern const int kSpectraSamples;
extern const double kSpectraTable[224][4];

const int kSpectraSamples = 224;
const double kSpectraTable[224][4] = {
    {0.050002, 0.122369, 0.168341, 0.583218},
    {0.050003, 0.123449, 0.166145, 0.584338},
    {0.050004, 0.124553, 0.164132, 0.585491},
    {0.050007, 0.125681, 0.162291, 0.586677},
    {0.050011, 0.126835, 0.160607, 0.587897},
    {0.050017, 0.128014, 0.159062, 0.589152},
    {0.050026, 0.129219, 0.157633, 0.590442},
    {0.050040, 0.130450, 0.156297, 0.591767},
    {0.050061, 0.131707, 0.155026, 0.593129},
    {0.050090, 0.132991, 0.153789, 0.594527},
    {0.050133, 0.134303, 0.152557, 0.595963},
    {0.050193, 0.135642, 0.151297, 0.597436},
    {0.050276, 0.137009, 0.149978, 0.598948},
    {0.050391, 0.138404, 0.148571, 0.600498},
    {0.050546, 0.139827, 0.147049, 0.602087},
    {0.050754, 0.141280, 0.145389, 0.603715},
    {0.051027, 0.142761, 0.143570, 0.605383},
    {0.051383, 0.144272, 0.141579, 0.607090},
    {0.051838, 0.145813, 0.139405, 0.608838},
    {0.052412, 0.147384, 0.137046, 0.610625},
    {0.053127, 0.148984, 0.134505, 0.612453},
    {0.054002, 0.150616, 0.131789, 0.614321},
    {0.055058, 0.152278, 0.128911, 0.616230},
    {0.056314, 0.153970, 0.125890, 0.618178},
    {0.057783, 0.155694, 0.122749, 0.620167},
    {0.059473, 0.157449, 0.119511, 0.622196},
    {0.061387, 0.159236, 0.116204, 0.624264},
    {0.063516, 0.161054, 0.112858, 0.626372},
    {0.065843, 0.162904, 0.109499, 0.628519},
    {0.068339, 0.164785, 0.106157, 0.630704},
    {0.070963, 0.166698, 0.102857, 0.632928},
    {0.073663, 0.168643, 0.099623, 0.635189},
    {0.076378, 0.170621, 0.096476, 0.637487},
    {0.079036, 0.172630, 0.093434, 0.639820},
    {0.081563, 0.174671, 0.090511, 0.642190},
    {0.083882, 0.176744, 0.087718, 0.644593},
    {0.085918, 0.178849, 0.085062, 0.647030},
    {0.087600, 0.180986, 0.082547, 0.649499},
    {0.088869, 0.183154, 0.080175, 0.651999},
    {0.089680, 0.185354, 0.077942, 0.654530},
    {0.090003, 0.187586, 0.075846, 0.657089},
    {0.089827, 0.189850, 0.073881, 0.659676},
    {0.089158, 0.192144, 0.072039, 0.662289},
    {0.088022, 0.194470, 0.070313, 0.664927},
    {0.086462, 0.196827, 0.068695, 0.667587},
    {0.084537, 0.199215, 0.067174, 0.670270},
    {0.082315, 0.201633, 0.065743, 0.672972},
    {0.079875, 0.204081, 0.064394, 0.675693},
    {0.077298, 0.206560, 0.063117, 0.678430},
    {0.074668, 0.209068, 0.061906, 0.681182},
    {0.072067, 0.211607, 0.060754, 0.683946},
    {0.069576, 0.214174, 0.059655, 0.686722},
    {0.067272, 0.216771, 0.058603, 0.689507},
    {0.065231, 0.219397, 0.057593, 0.692299},
    {0.063533, 0.222051, 0.056621, 0.695097},
    {0.062266, 0.224734, 0.055684, 0.697898},
    {0.061538, 0.227445, 0.054778, 0.700701},
    {0.061489, 0.230184, 0.053902, 0.703503},
    {0.062310, 0.232950, 0.053052, 0.706302},
    {0.064266, 0.235745, 0.052227, 0.709098},
    {0.067722, 0.238566, 0.051426, 0.711886},
    {0.073177, 0.241415, 0.050646, 0.714667},
    {0.081283, 0.244291, 0.049888, 0.717438},
    {0.092851, 0.247194, 0.049149, 0.720196},
    {0.108804, 0.250124, 0.048429, 0.722941},
    {0.130045, 0.253080, 0.047728, 0.725670},
    {0.157211, 0.256063, 0.047045, 0.728381},
    {0.190330, 0.259072, 0.046379, 0.731074},
    {0.228493, 0.262108, 0.045729, 0.733746},
    {0.269749, 0.265170, 0.045096, 0.736395},
    {0.311404, 0.268258, 0.044478, 0.739020},
    {0.350666, 0.271373, 0.043875, 0.741620},
    {0.385350, 0.274513, 0.043288, 0.744193},
    {0.414280, 0.277679, 0.042715, 0.746737},
    {0.437278, 0.280872, 0.042156, 0.749251},
    {0.454871, 0.284089, 0.041611, 0.751734},
    {0.467939, 0.287333, 0.041079, 0.754183},
    {0.477433, 0.290601, 0.040560, 0.756597},
    {0.484222, 0.293895, 0.040054, 0.758974},
    {0.489022, 0.297213, 0.039561, 0.761310},
    {0.492387, 0.300555, 0.039080, 0.763602},
    {0.494733, 0.303920, 0.038610, 0.765845},
    {0.496361, 0.307308, 0.038152, 0.768032},
    {0.497489, 0.310719, 0.037706, 0.770154},
    {0.498269, 0.314150, 0.037270, 0.772201},
    {0.498806, 0.317602, 0.036845, 0.774154},
    {0.499176, 0.321072, 0.036431, 0.775994},
    {0.499430, 0.324560, 0.036026, 0.777692},
    {0.499602, 0.328064, 0.035632, 0.779215},
    {0.499717, 0.331582, 0.035247, 0.780517},
    {0.499790, 0.335113, 0.034872, 0.781544},
    {0.499830, 0.338654, 0.034506, 0.782231},
    {0.499841, 0.342203, 0.034149, 0.782500},
    {0.499822, 0.345758, 0.033801, 0.782262},
    {0.499769, 0.349315, 0.033462, 0.781416},
    {0.499670, 0.352872, 0.033130, 0.779854},
    {0.499510, 0.356426, 0.032807, 0.777462},
    {0.499264, 0.359974, 0.032492, 0.774124},
    {0.498899, 0.363511, 0.032185, 0.769732},
    {0.498370, 0.367036, 0.031885, 0.764190},
    {0.497622, 0.370542, 0.031593, 0.757426},
    {0.496583, 0.374028, 0.031307, 0.749399},
    {0.495166, 0.377488, 0.031029, 0.740110},
    {0.493273, 0.380919, 0.030758, 0.729611},
    {0.490789, 0.384316, 0.030493, 0.718011},
    {0.487592, 0.387675, 0.030235, 0.705482},
    {0.483558, 0.390991, 0.029983, 0.692260},
    {0.478567, 0.394261, 0.029737, 0.678641},
    {0.472516, 0.397480, 0.029498, 0.664976},
    {0.465329, 0.400644, 0.029264, 0.651657},
    {0.456976, 0.403748, 0.029036, 0.639103},
    {0.447479, 0.406789, 0.028814, 0.627739},
    {0.436929, 0.409763, 0.028597, 0.617975},
    {0.425494, 0.412666, 0.028385, 0.610187},
    {0.413417, 0.415494, 0.028179, 0.604690},
    {0.401021, 0.418245, 0.027978, 0.601724},
    {0.388692, 0.420916, 0.027782, 0.601436},
    {0.376864, 0.423503, 0.027590, 0.603875},
    {0.365994, 0.426005, 0.027403, 0.608987},
    {0.356535, 0.428419, 0.027221, 0.616615},
    {0.348905, 0.430744, 0.027044, 0.626516},
    {0.343451, 0.432979, 0.026870, 0.638369},
    {0.340429, 0.435122, 0.026701, 0.651798},
    {0.339979, 0.437173, 0.026536, 0.666391},
    {0.342113, 0.439133, 0.026375, 0.681724},
    {0.346715, 0.441001, 0.026219, 0.697380},
    {0.353548, 0.442778, 0.026066, 0.712971},
    {0.362271, 0.444464, 0.025916, 0.728153},
    {0.372464, 0.446062, 0.025771, 0.742634},
    {0.383659, 0.447574, 0.025629, 0.756184},
    {0.395367, 0.449000, 0.025490, 0.768638},
    {0.407110, 0.450344, 0.025355, 0.779892},
    {0.418443, 0.451609, 0.025223, 0.789899},
    {0.428980, 0.452797, 0.025095, 0.798664},
    {0.438396, 0.453911, 0.024970, 0.806228},
    {0.446442, 0.454955, 0.024847, 0.812668},
    {0.452939, 0.455933, 0.024728, 0.818080},
    {0.457773, 0.456848, 0.024612, 0.822573},
    {0.460888, 0.457704, 0.024498, 0.826259},
    {0.462275, 0.458505, 0.024388, 0.829252},
    {0.461957, 0.459254, 0.024280, 0.831656},
    {0.459987, 0.459957, 0.024174, 0.833566},
    {0.456436, 0.460617, 0.024072, 0.835065},
    {0.451393, 0.461238, 0.023971, 0.836221},
    {0.444955, 0.461823, 0.023874, 0.837089},
    {0.437238, 0.462377, 0.023778, 0.837708},
    {0.428371, 0.462902, 0.023685, 0.838107},
    {0.418502, 0.463404, 0.023595, 0.838299},
    {0.407799, 0.463884, 0.023506, 0.838286},
    {0.396456, 0.464345, 0.023420, 0.838060},
    {0.384690, 0.464791, 0.023336, 0.837601},
    {0.372738, 0.465225, 0.023254, 0.836879},
    {0.360860, 0.465647, 0.023174, 0.835855},
    {0.349330, 0.466060, 0.023096, 0.834483},
    {0.338427, 0.466465, 0.023019, 0.832707},
    {0.328429, 0.466863, 0.022945, 0.830465},
    {0.319601, 0.467255, 0.022873, 0.827690},
    {0.312188, 0.467640, 0.022802, 0.824309},
    {0.306398, 0.468017, 0.022733, 0.820247},
    {0.302399, 0.468385, 0.022666, 0.815432},
    {0.300309, 0.468741, 0.022600, 0.809793},
    {0.300191, 0.469082, 0.022536, 0.803264},
    {0.302048, 0.469404, 0.022474, 0.795791},
    {0.305825, 0.469700, 0.022413, 0.787333},
    {0.311413, 0.469964, 0.022354, 0.777869},
    {0.318649, 0.470188, 0.022296, 0.767397},
    {0.327330, 0.470363, 0.022239, 0.755944},
    {0.337221, 0.470479, 0.022184, 0.743563},
    {0.348061, 0.470524, 0.022130, 0.730341},
    {0.359581, 0.470485, 0.022078, 0.716397},
    {0.371510, 0.470349, 0.022027, 0.701882},
    {0.383587, 0.470102, 0.021977, 0.686982},
    {0.395571, 0.469731, 0.021928, 0.671911},
    {0.407247, 0.469220, 0.021881, 0.656908},
    {0.418432, 0.468559, 0.021835, 0.642233},
    {0.428977, 0.467735, 0.021789, 0.628159},
    {0.438769, 0.466739, 0.021745, 0.614964},
    {0.447733, 0.465566, 0.021702, 0.602922},
    {0.455826, 0.464213, 0.021661, 0.592293},
    {0.463034, 0.462683, 0.021620, 0.583317},
    {0.469372, 0.460981, 0.021580, 0.576200},
    {0.474874, 0.459121, 0.021541, 0.571112},
    {0.479591, 0.457121, 0.021503, 0.568175},
    {0.483587, 0.455005, 0.021466, 0.567462},
    {0.486931, 0.452804, 0.021430, 0.568993},
    {0.489696, 0.450553, 0.021395, 0.572733},
    {0.491956, 0.448294, 0.021361, 0.578595},
    {0.493783, 0.446070, 0.021327, 0.586444},
    {0.495242, 0.443930, 0.021294, 0.596098},
    {0.496395, 0.441923, 0.021263, 0.607343},
    {0.497295, 0.440097, 0.021231, 0.619931},
    {0.497991, 0.438500, 0.021201, 0.633598},
    {0.498522, 0.437176, 0.021172, 0.648068},
    {0.498924, 0.436164, 0.021143, 0.663064},
    {0.499224, 0.435497, 0.021115, 0.678317},
    {0.499446, 0.435200, 0.021087, 0.693572},
    {0.499609, 0.435289, 0.021060, 0.708596},
    {0.499726, 0.435771, 0.021034, 0.723182},
    {0.499810, 0.436644, 0.021009, 0.737157},
    {0.499870, 0.437896, 0.020984, 0.750376},
    {0.499912, 0.439505, 0.020960, 0.762731},
    {0.499940, 0.441443, 0.020936, 0.774145},
    {0.499960, 0.443673, 0.020913, 0.784572},
    {0.499974, 0.446152, 0.020891, 0.793994},
    {0.499983, 0.448835, 0.020869, 0.802420},
    {0.499989, 0.451673, 0.020847, 0.809876},
    {0.499993, 0.454617, 0.020827, 0.816410},
    {0.499996, 0.457618, 0.020806, 0.822077},
    {0.499997, 0.460629, 0.020786, 0.826947},
    {0.499998, 0.463607, 0.020767, 0.831092},
    {0.499999, 0.466514, 0.020748, 0.834587},
    {0.499999, 0.469315, 0.020730, 0.837506},
    {0.500000, 0.471985, 0.020712, 0.839924},
    {0.500000, 0.474501, 0.020694, 0.841909},
    {0.500000, 0.476846, 0.020677, 0.843523},
    {0.500000, 0.479012, 0.020661, 0.844827},
    {0.500000, 0.480993, 0.020644, 0.845870},
    {0.500000, 0.482790, 0.020628, 0.846699},
    {0.500000, 0.484405, 0.020613, 0.847352},
    {0.500000, 0.485846, 0.020598, 0.847864},
    {0.500000, 0.487123, 0.020583, 0.848262},
    {0.500000, 0.488247, 0.020569, 0.848571},
    {0.500000, 0.489232, 0.020555, 0.848809},
    {0.500000, 0.490090, 0.020541, 0.848993},
};

}  // namespace unmix::detail
