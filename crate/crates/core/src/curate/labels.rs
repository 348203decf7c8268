use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Platform {
    Mobile,
    Desktop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Complexity {
    Low,
    Mid,
    High,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContentCategory {
    UserIdentity,
    Marketing,
    ECommerce,
    DataPresentation,
    FormsAndFlows,
    Communication,
    SupportAndOnboarding,
    NotificationsAndStates,
    MediaAndEntertainment,
    SchedulingAndActivities,
    HealthAndLifestyle,
    Others,
}

impl ContentCategory {
    pub const ALL: [ContentCategory; 12] = [
        ContentCategory::UserIdentity,
        ContentCategory::Marketing,
        ContentCategory::ECommerce,
        ContentCategory::DataPresentation,
        ContentCategory::FormsAndFlows,
        ContentCategory::Communication,
        ContentCategory::SupportAndOnboarding,
        ContentCategory::NotificationsAndStates,
        ContentCategory::MediaAndEntertainment,
        ContentCategory::SchedulingAndActivities,
        ContentCategory::HealthAndLifestyle,
        ContentCategory::Others,
    ];

    pub fn display_name(&self) -> &'static str {
        match self {
            ContentCategory::UserIdentity => "User Identity & Personalization",
            ContentCategory::Marketing => "Marketing & Landing Content",
            ContentCategory::ECommerce => "E-Commerce & Transactions",
            ContentCategory::DataPresentation => "Data & Information Presentation",
            ContentCategory::FormsAndFlows => "Forms & Interaction Flows",
            ContentCategory::Communication => "Communication & Collaboration",
            ContentCategory::SupportAndOnboarding => "Support, Guidance & Onboarding",
            ContentCategory::NotificationsAndStates => "Notifications & States",
            ContentCategory::MediaAndEntertainment => "Media & Entertainment",
            ContentCategory::SchedulingAndActivities => "Scheduling & Activities",
            ContentCategory::HealthAndLifestyle => "Health & Lifestyle",
            ContentCategory::Others => "Others",
        }
    }

    /// Upper snake case code used in CSV files, e.g. `E_COMMERCE_AND_TRANSACTIONS`.
    pub fn code(&self) -> String {
        normalise(self.display_name())
    }
}

fn normalise(s: &str) -> String {
    let mut out = String::new();
    for w in s.replace('&', " and ").split(|c: char| !c.is_ascii_alphanumeric()).filter(|w| !w.is_empty()) {
        if !out.is_empty() {
            out.push('_');
        }
        out.push_str(&w.to_ascii_uppercase());
    }
    out
}

impl FromStr for ContentCategory {
    type Err = String;

    /// Accepts the display name or its code, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = normalise(s);
        ContentCategory::ALL
            .into_iter()
            .find(|c| c.code() == key || (key == "OTHER" && *c == ContentCategory::Others))
            .ok_or_else(|| format!("unknown content category {s:?}"))
    }
}

impl fmt::Display for ContentCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

impl FromStr for Platform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MOBILE" => Ok(Platform::Mobile),
            "DESKTOP" => Ok(Platform::Desktop),
            _ => Err(format!("unknown platform {s:?}")),
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Platform::Mobile => "MOBILE",
            Platform::Desktop => "DESKTOP",
        })
    }
}

impl FromStr for Complexity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LOW" => Ok(Complexity::Low),
            "MID" | "MEDIUM" => Ok(Complexity::Mid),
            "HIGH" => Ok(Complexity::High),
            "HARD" => Ok(Complexity::Hard),
            _ => Err(format!("unknown complexity {s:?}")),
        }
    }
}

impl fmt::Display for Complexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Complexity::Low => "LOW",
            Complexity::Mid => "MID",
            Complexity::High => "HIGH",
            Complexity::Hard => "HARD",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageLabel {
    pub platform: Platform,
    pub complexity: Complexity,
    /// 1 (fair) to 3 (excellent).
    pub quality: u8,
    pub content_category: ContentCategory,
    pub description: String,
}

#[derive(Debug, thiserror::Error)]
pub enum LabelError {
    #[error("labels CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("labels CSV row {row}: {message}")]
    Row { row: usize, message: String },
}

/// Reads `id,platform,complexity,quality,category[,description]` rows
/// (header required; `content_category` is accepted for `category`).
pub fn read_labels<R: Read>(reader: R) -> Result<BTreeMap<String, PageLabel>, LabelError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |names: &[&str]| headers.iter().position(|h| names.contains(&h.to_ascii_lowercase().as_str()));
    let missing = |name: &str| LabelError::Row { row: 1, message: format!("missing column {name:?}") };
    let id_c = col(&["id", "sample_id"]).ok_or_else(|| missing("id"))?;
    let plat_c = col(&["platform"]).ok_or_else(|| missing("platform"))?;
    let cplx_c = col(&["complexity"]).ok_or_else(|| missing("complexity"))?;
    let qual_c = col(&["quality"]).ok_or_else(|| missing("quality"))?;
    let cat_c = col(&["category", "content_category"]).ok_or_else(|| missing("category"))?;
    let desc_c = col(&["description"]);

    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let bad = |message: String| LabelError::Row { row, message };
        let quality: u8 = field(qual_c).parse().map_err(|_| bad(format!("quality {:?} is not 1, 2 or 3", field(qual_c))))?;
        if !(1..=3).contains(&quality) {
            return Err(bad(format!("quality {quality} is not 1, 2 or 3")));
        }
        let label = PageLabel {
            platform: field(plat_c).parse().map_err(bad)?,
            complexity: field(cplx_c).parse().map_err(bad)?,
            quality,
            content_category: field(cat_c).parse().map_err(bad)?,
            description: desc_c.map(|c| field(c).to_string()).unwrap_or_default(),
        };
        let id = field(id_c).to_string();
        if out.insert(id.clone(), label).is_some() {
            return Err(bad(format!("duplicate id {id:?}")));
        }
    }
    Ok(out)
}
