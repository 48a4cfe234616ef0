//! Compiled-in scenarios for every panel of the Gaussian-potential study.

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub toml: &'static str,
}

macro_rules! fig2 {
    ($name:literal, $desc:literal, $modulation:literal) => {
        Preset {
            name: $name,
            description: $desc,
            toml: concat!(
                "mode = \"time_domain\"\ndescription = \"",
                $desc,
                "\"\n",
                $modulation,
                "\n[outputs]\ndirectory = \"out/",
                $name,
                "\"\nx_split = -20.0\n",
                r#"
[grid]
x_min = -320.0
x_max = 320.0
n = 4096

[packet]
center = -80.0
width = 25.0
carrier = 0.5
normalize = true

[potential]
type = "gaussian"
v0 = 7.0
beta = 0.015625

[plan]
total_time = 180.0
steps_per_record = 50
"#
            ),
        }
    };
}

macro_rules! fig3 {
    ($name:literal, $mode:literal, $desc:literal, $modulation:literal) => {
        Preset {
            name: $name,
            description: $desc,
            toml: concat!(
                "mode = \"",
                $mode,
                "\"\ndescription = \"",
                $desc,
                "\"\n",
                $modulation,
                "\n[outputs]\ndirectory = \"out/",
                $name,
                "\"\nintensity_every = 10\nintensity_x_stride = 4\n",
                r#"
[grid]
x_min = -256.0
x_max = 256.0
n = 4096

[packet]
center = 0.0
width = 5.0
carrier = 0.0
normalize = true

[potential]
type = "gaussian"
v0 = 20.0
beta = 0.015625

[plan]
total_time = 40.0
steps_per_record = 2
"#
            ),
        }
    };
}

macro_rules! floquet {
    ($name:literal, $desc:literal, $modulation:literal) => {
        Preset {
            name: $name,
            description: $desc,
            toml: concat!(
                "mode = \"floquet\"\ndescription = \"",
                $desc,
                "\"\n",
                $modulation,
                "\n[outputs]\ndirectory = \"out/",
                $name,
                "\"\nwhich = []\n",
                r#"
[potential]
type = "gaussian"
v0 = 7.0
beta = 0.015625

[floquet]
omega0 = 0.25
"#
            ),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    fig2!(
        "fig2a",
        "Hermitian cos(0.9t) drive: wave packet reflected by the double-humped effective barrier",
        "[modulation]\npreset = \"cos\"\nomega = 0.9\n"
    ),
    fig2!(
        "fig2b",
        "one-sided (1/2)exp(0.9it) drive: invisible potential, packet transmitted as if free",
        "[modulation]\npreset = \"one_sided\"\nomega = 0.9\n"
    ),
    fig2!(
        "fig2c",
        "quasi-periodic (1/4)[exp(0.9it) + exp(0.9i sqrt2 t)] drive: invisible potential",
        "[modulation]\npreset = \"two_tone\"\nomega = 0.9\n"
    ),
    fig2!(
        "fig2d",
        "negative-one-sided (1/2)exp(-0.9it) drive: visible, fast sidebands generated",
        "[modulation]\npreset = \"one_sided_negative\"\nomega = 0.9\n"
    ),
    fig3!(
        "fig3a",
        "free_reference",
        "free spreading of the w0=5 packet (reference width curve)",
        ""
    ),
    fig3!(
        "fig3b",
        "time_domain",
        "Kapitza case cos(3t), V0=20: dynamical localization by the effective potential",
        "[modulation]\npreset = \"cos\"\nomega = 3.0\n"
    ),
    fig3!(
        "fig3c",
        "time_domain",
        "one-sided (1/2)exp(3it), V0=20: breathing packet that spreads like a free one on average",
        "[modulation]\npreset = \"one_sided\"\nomega = 3.0\n"
    ),
    fig3!(
        "fig3d",
        "time_domain",
        "quasi-periodic two-tone drive at omega=3, V0=20: breathing, free-like spreading on average",
        "[modulation]\npreset = \"two_tone\"\nomega = 3.0\n"
    ),
    floquet!(
        "floquet-invisible",
        "sideband scattering for (1/2)exp(0.9it) at omega0=0.25: unit transmission, no reflection",
        "[modulation]\npreset = \"one_sided\"\nomega = 0.9\n"
    ),
    floquet!(
        "floquet-hermitian",
        "sideband scattering for cos(0.9t) at omega0=0.25: strong reflection, flux conserved",
        "[modulation]\npreset = \"cos\"\nomega = 0.9\n"
    ),
    floquet!(
        "floquet-negative",
        "sideband scattering for (1/2)exp(-0.9it) at omega0=0.25: propagating upper sidebands",
        "[modulation]\npreset = \"one_sided_negative\"\nomega = 0.9\n"
    ),
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
