use serde::{Deserialize, Serialize};

/// Room and element label IDs used in floor-plan segmentation masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Label {
    LivingRoom = 1,
    MasterRoom = 2,
    Kitchen = 3,
    Bathroom = 4,
    DiningRoom = 5,
    ChildRoom = 6,
    StudyRoom = 7,
    SecondRoom = 8,
    GuestRoom = 9,
    Balcony = 10,
    Entrance = 11,
    Storage = 12,
    WallIn = 13,
    External = 14,
    ExteriorWall = 15,
    InteriorWall = 16,
    FrontDoor = 17,
    InteriorDoor = 18,
    OpenWall = 19,
    Window = 20,
    BalconyDoor = 21,
}

/// Every label that denotes a room (IDs 1 through 13).
pub const ROOM_LABELS: [Label; 13] = [
    Label::LivingRoom,
    Label::MasterRoom,
    Label::Kitchen,
    Label::Bathroom,
    Label::DiningRoom,
    Label::ChildRoom,
    Label::StudyRoom,
    Label::SecondRoom,
    Label::GuestRoom,
    Label::Balcony,
    Label::Entrance,
    Label::Storage,
    Label::WallIn,
];

impl Label {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Label> {
        use Label::*;
        Some(match id {
            1 => LivingRoom,
            2 => MasterRoom,
            3 => Kitchen,
            4 => Bathroom,
            5 => DiningRoom,
            6 => ChildRoom,
            7 => StudyRoom,
            8 => SecondRoom,
            9 => GuestRoom,
            10 => Balcony,
            11 => Entrance,
            12 => Storage,
            13 => WallIn,
            14 => External,
            15 => ExteriorWall,
            16 => InteriorWall,
            17 => FrontDoor,
            18 => InteriorDoor,
            19 => OpenWall,
            20 => Window,
            21 => BalconyDoor,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        use Label::*;
        match self {
            LivingRoom => "Living Room",
            MasterRoom => "Master Room",
            Kitchen => "Kitchen",
            Bathroom => "Bathroom",
            DiningRoom => "Dining Room",
            ChildRoom => "Child Room",
            StudyRoom => "Study Room",
            SecondRoom => "Second Room",
            GuestRoom => "Guest Room",
            Balcony => "Balcony",
            Entrance => "Entrance",
            Storage => "Storage",
            WallIn => "Wall-in",
            External => "External",
            ExteriorWall => "Exterior Wall",
            InteriorWall => "Interior Wall",
            FrontDoor => "Front Door",
            InteriorDoor => "Interior Door",
            OpenWall => "Open Wall",
            Window => "Window",
            BalconyDoor => "Balcony Door",
        }
    }

    pub fn is_room_id(id: u8) -> bool {
        (1..=13).contains(&id)
    }

    /// Walls, doors, open walls and windows.
    pub fn is_structural_id(id: u8) -> bool {
        (15..=21).contains(&id)
    }

    pub fn is_door_id(id: u8) -> bool {
        matches!(id, 17 | 18 | 21)
    }
}
