//! The six example scenarios shipped under `scenarios/`.

use super::{parse_scenario, ParseError, Scenario};

pub const SHIPPED_SCENARIOS: [(&str, &str); 6] = [
    ("street_day", include_str!("../../../../scenarios/street_day.cfg")),
    ("street_night", include_str!("../../../../scenarios/street_night.cfg")),
    ("font_fog", include_str!("../../../../scenarios/font_fog.cfg")),
    ("street_moving", include_str!("../../../../scenarios/street_moving.cfg")),
    ("font_midday", include_str!("../../../../scenarios/font_midday.cfg")),
    ("font_moving", include_str!("../../../../scenarios/font_moving.cfg")),
];

/// Parses a shipped scenario by name. `None` if no such scenario ships.
pub fn shipped_scenario(name: &str) -> Option<Result<Scenario, ParseError>> {
    SHIPPED_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_scenario(text))
}
